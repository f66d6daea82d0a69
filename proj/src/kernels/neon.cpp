#include <arm_neon.h>

#include <algorithm>
#include <limits>

#include "phylonet/kernels.hpp"

namespace phylonet::kernels::neon {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 = vfmaq_f64(a0, vld1q_f64(x + i), vld1q_f64(y + i));
    a1 = vfmaq_f64(a1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double cf_backward(const double* c, const double* d, std::size_t levels, double mu,
                   const double* z, const double* term, double* out, std::size_t count) {
  float64x2_t muv = vdupq_n_f64(mu);
  float64x2_t minv = vdupq_n_f64(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    float64x2_t zv = vld1q_f64(z + i);
    float64x2_t g = vld1q_f64(term + i);
    for (std::size_t j = levels; j-- > 0;) {
      float64x2_t den = vsubq_f64(vdupq_n_f64(d[j]), g);
      minv = vminq_f64(minv, den);
      g = vdivq_f64(vfmaq_f64(vdupq_n_f64(c[j]), muv, zv), den);
    }
    vst1q_f64(out + i, g);
  }
  double min_den = vminvq_f64(minv);
  if (i < count)
    min_den = std::min(min_den, scalar::cf_backward(c, d, levels, mu, z + i, term + i, out + i,
                                                    count - i));
  return min_den;
}

}  // namespace phylonet::kernels::neon
