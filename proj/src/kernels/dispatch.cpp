#include <atomic>

#include "phylonet/errors.hpp"
#include "phylonet/kernels.hpp"

namespace phylonet::kernels {

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*cf_backward)(const double*, const double*, std::size_t, double, const double*,
                        const double*, double*, std::size_t);
};

constexpr Table kScalar{scalar::dot, scalar::axpy, scalar::cf_backward};
#if defined(PHYLONET_HAVE_AVX2)
constexpr Table kAvx2{avx2::dot, avx2::axpy, avx2::cf_backward};
#endif
#if defined(PHYLONET_HAVE_NEON)
constexpr Table kNeon{neon::dot, neon::axpy, neon::cf_backward};
#endif

Backend detect() {
#if defined(PHYLONET_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::Avx2;
#endif
#if defined(PHYLONET_HAVE_NEON)
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

const Table* table_for(Backend b) {
  switch (b) {
#if defined(PHYLONET_HAVE_AVX2)
    case Backend::Avx2: return &kAvx2;
#endif
#if defined(PHYLONET_HAVE_NEON)
    case Backend::Neon: return &kNeon;
#endif
    default: return &kScalar;
  }
}

std::atomic<const Table*> g_table{nullptr};
std::atomic<int> g_backend{-1};

const Table& table() {
  const Table* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    Backend b = detect();
    g_backend.store(static_cast<int>(b), std::memory_order_relaxed);
    t = table_for(b);
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(PHYLONET_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(PHYLONET_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() {
  table();
  return static_cast<Backend>(g_backend.load(std::memory_order_relaxed));
}

void select_backend(Backend b) {
  if (!backend_available(b))
    throw UsageError(std::string("kernel backend not available: ") + backend_name(b));
  g_backend.store(static_cast<int>(b), std::memory_order_relaxed);
  g_table.store(table_for(b), std::memory_order_release);
}

void reset_backend() {
  g_table.store(nullptr, std::memory_order_release);
  table();
}

double dot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }

void axpy(double a, const double* x, double* y, std::size_t n) { table().axpy(a, x, y, n); }

double cf_backward(const double* c, const double* d, std::size_t levels, double mu,
                   const double* z, const double* term, double* out, std::size_t count) {
  return table().cf_backward(c, d, levels, mu, z, term, out, count);
}

}  // namespace phylonet::kernels
