#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "phylonet/errors.hpp"
#include "phylonet/kernels.hpp"
#include "phylonet/rng.hpp"

using namespace phylonet;
using namespace phylonet::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t id) {
  RngStream r(99, id);
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform() * 2 - 1;
  return v;
}

class KernelBackends : public ::testing::TestWithParam<Backend> {
 protected:
  void SetUp() override {
    if (!backend_available(GetParam())) GTEST_SKIP() << backend_name(GetParam()) << " not available";
    select_backend(GetParam());
  }
  void TearDown() override { reset_backend(); }
};

}  // namespace

TEST_P(KernelBackends, DotMatchesScalar) {
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 1001u}) {
    auto x = random_vec(n, 1), y = random_vec(n, 2);
    double ref = scalar::dot(x.data(), y.data(), n);
    EXPECT_NEAR(dot(x.data(), y.data(), n), ref, 1e-13 * (1 + n)) << "n=" << n;
  }
}

TEST_P(KernelBackends, AxpyMatchesScalar) {
  for (std::size_t n : {0u, 1u, 5u, 8u, 333u}) {
    auto x = random_vec(n, 3), y = random_vec(n, 4), y2 = y;
    axpy(0.37, x.data(), y.data(), n);
    scalar::axpy(0.37, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], y2[i], 1e-15);
  }
}

TEST_P(KernelBackends, ContinuedFractionMatchesScalar) {
  // Diagonally dominant coefficients keep every denominator positive.
  const std::size_t levels = 40;
  std::vector<double> c(levels), d(levels);
  for (std::size_t j = 0; j < levels; ++j) {
    c[j] = 0.5 + 0.25 * j;
    d[j] = 2.0 + 1.0 * j;
  }
  for (std::size_t count : {1u, 3u, 4u, 11u}) {
    std::vector<double> z(count), term(count, 1.0), out(count), ref(count);
    for (std::size_t i = 0; i < count; ++i) z[i] = static_cast<double>(i) / count;
    double m1 = cf_backward(c.data(), d.data(), levels, 1.0, z.data(), term.data(), out.data(), count);
    double m2 = scalar::cf_backward(c.data(), d.data(), levels, 1.0, z.data(), term.data(), ref.data(), count);
    EXPECT_NEAR(m1, m2, 1e-13);
    for (std::size_t i = 0; i < count; ++i) EXPECT_NEAR(out[i], ref[i], 1e-14);
  }
}

INSTANTIATE_TEST_SUITE_P(All, KernelBackends,
                         ::testing::Values(Backend::Scalar, Backend::Avx2, Backend::Neon),
                         [](const auto& info) { return std::string(backend_name(info.param)); });

TEST(Kernels, ScalarContinuedFractionByHand) {
  // Two levels: g1 = (c1 + mu z)/(d1 - t), g0 = (c0 + mu z)/(d0 - g1).
  double c[2] = {1.0, 2.0}, d[2] = {4.0, 5.0}, z = 0.5, t = 1.0, out = 0;
  double g1 = (2.0 + 0.5) / (5.0 - 1.0);
  double g0 = (1.0 + 0.5) / (4.0 - g1);
  double mind = scalar::cf_backward(c, d, 2, 1.0, &z, &t, &out, 1);
  EXPECT_DOUBLE_EQ(out, g0);
  EXPECT_DOUBLE_EQ(mind, 4.0 - g1);
}

TEST(Kernels, UnavailableBackendThrows) {
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (!backend_available(b)) {
      EXPECT_THROW(select_backend(b), UsageError);
    }
  EXPECT_TRUE(backend_available(Backend::Scalar));
}
