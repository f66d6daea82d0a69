#include <algorithm>
#include <limits>

#include "phylonet/kernels.hpp"

namespace phylonet::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double cf_backward(const double* c, const double* d, std::size_t levels, double mu,
                   const double* z, const double* term, double* out, std::size_t count) {
  double min_den = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    double g = term[i];
    for (std::size_t j = levels; j-- > 0;) {
      double den = d[j] - g;
      min_den = std::min(min_den, den);
      g = (c[j] + mu * z[i]) / den;
    }
    out[i] = g;
  }
  return min_den;
}

}  // namespace phylonet::kernels::scalar
