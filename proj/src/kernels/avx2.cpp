#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "phylonet/kernels.hpp"

namespace phylonet::kernels::avx2 {

namespace {
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}
inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_min_sd(lo, sh));
}
}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  for (; i + 4 <= n; i += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double cf_backward(const double* c, const double* d, std::size_t levels, double mu,
                   const double* z, const double* term, double* out, std::size_t count) {
  __m256d muv = _mm256_set1_pd(mu);
  __m256d minv = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    __m256d zv = _mm256_loadu_pd(z + i);
    __m256d g = _mm256_loadu_pd(term + i);
    for (std::size_t j = levels; j-- > 0;) {
      __m256d den = _mm256_sub_pd(_mm256_set1_pd(d[j]), g);
      minv = _mm256_min_pd(minv, den);
      g = _mm256_div_pd(_mm256_fmadd_pd(muv, zv, _mm256_set1_pd(c[j])), den);
    }
    _mm256_storeu_pd(out + i, g);
  }
  double min_den = hmin(minv);
  if (i < count)
    min_den = std::min(min_den, scalar::cf_backward(c, d, levels, mu, z + i, term + i, out + i,
                                                    count - i));
  return min_den;
}

}  // namespace phylonet::kernels::avx2
