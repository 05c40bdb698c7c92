#pragma once

#include <cstddef>
#include <string>

// Arithmetic inner loops shared by the network and the trainer. Every kernel
// has a scalar reference implementation plus SIMD variants (AVX2 on x86-64,
// NEON on aarch64) selected once at startup by CPU detection. The elementwise
// kernels (axpy, scale, adagrad_update) keep the scalar operation order per
// element and are bitwise-equal across backends; the reductions (dot,
// sum_squares) reorder the accumulation and agree to ~1e-15 relative.
//
// Backend can be forced with force_backend() or the CLINX_KERNELS env var
// ("scalar", "avx2", "neon"); the active name is recorded in run manifests.

namespace clinx::kernels {

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void scale(double alpha, double* x, std::size_t n);
double sum_squares(const double* x, std::size_t n);
// g is consumed elementwise: accum += g*g; param -= lr*g/(sqrt(accum)+eps)
void adagrad_update(double* param, double* accum, const double* grad,
                    std::size_t n, double lr, double eps);

const std::string& active_backend();
// returns false if the named backend is unavailable on this machine
bool force_backend(const std::string& name);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sum_squares(const double* x, std::size_t n);
void adagrad_update(double* param, double* accum, const double* grad,
                    std::size_t n, double lr, double eps);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define CLINX_HAVE_AVX2_BUILD 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sum_squares(const double* x, std::size_t n);
void adagrad_update(double* param, double* accum, const double* grad,
                    std::size_t n, double lr, double eps);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define CLINX_HAVE_NEON_BUILD 1
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sum_squares(const double* x, std::size_t n);
void adagrad_update(double* param, double* accum, const double* grad,
                    std::size_t n, double lr, double eps);
}  // namespace neon
#endif

}  // namespace clinx::kernels
