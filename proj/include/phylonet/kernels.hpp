#pragma once

#include <cstddef>

namespace phylonet::kernels {

enum class Backend { Scalar, Avx2, Neon };

const char* backend_name(Backend b);
bool backend_available(Backend b);
/// Backend used by the dispatching entry points below. Chosen from CPU
/// features on first use unless select_backend() was called.
Backend active_backend();
/// Forces a backend; throws UsageError if the CPU or build lacks it.
void select_backend(Backend b);
/// Returns to automatic selection.
void reset_backend();

/// sum_i x[i] * y[i].
double dot(const double* x, const double* y, std::size_t n);
/// y[i] += a * x[i].
void axpy(double a, const double* x, double* y, std::size_t n);

/// Backward continued-fraction recursion, one lane per z:
///   g_j = (c[j] + mu * z) / (d[j] - g_{j+1}),  j = levels-1, ..., 0,
/// seeded with g_levels = term[i]; out[i] receives g_0.
/// Returns the smallest denominator met in any lane (a value <= 0 means the
/// recursion crossed a pole and out is meaningless).
double cf_backward(const double* c, const double* d, std::size_t levels, double mu,
                   const double* z, const double* term, double* out, std::size_t count);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double cf_backward(const double* c, const double* d, std::size_t levels, double mu,
                   const double* z, const double* term, double* out, std::size_t count);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double cf_backward(const double* c, const double* d, std::size_t levels, double mu,
                   const double* z, const double* term, double* out, std::size_t count);
}  // namespace avx2

namespace neon {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double cf_backward(const double* c, const double* d, std::size_t levels, double mu,
                   const double* z, const double* term, double* out, std::size_t count);
}  // namespace neon

}  // namespace phylonet::kernels
