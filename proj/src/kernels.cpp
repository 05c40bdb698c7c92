#include "clinx/kernels.hpp"

#include <cmath>
#include <cstdlib>

namespace clinx::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sum_squares(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void adagrad_update(double* param, double* accum, const double* grad,
                    std::size_t n, double lr, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    accum[i] += g * g;
    param[i] -= (lr * g) / (std::sqrt(accum[i]) + eps);
  }
}

}  // namespace scalar

namespace {

struct Backend {
  const char* name;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  double (*sum_squares)(const double*, std::size_t);
  void (*adagrad_update)(double*, double*, const double*, std::size_t, double,
                         double);
};

constexpr Backend kScalar = {"scalar",        scalar::dot,
                             scalar::axpy,    scalar::scale,
                             scalar::sum_squares, scalar::adagrad_update};

#ifdef CLINX_HAVE_AVX2_BUILD
constexpr Backend kAvx2 = {"avx2",        avx2::dot,
                           avx2::axpy,    avx2::scale,
                           avx2::sum_squares, avx2::adagrad_update};
#endif

#ifdef CLINX_HAVE_NEON_BUILD
constexpr Backend kNeon = {"neon",        neon::dot,
                           neon::axpy,    neon::scale,
                           neon::sum_squares, neon::adagrad_update};
#endif

const Backend* lookup(const std::string& name) {
  if (name == "scalar") return &kScalar;
#ifdef CLINX_HAVE_AVX2_BUILD
  if (name == "avx2" && __builtin_cpu_supports("avx2")) return &kAvx2;
#endif
#ifdef CLINX_HAVE_NEON_BUILD
  if (name == "neon") return &kNeon;
#endif
  return nullptr;
}

const Backend* detect() {
  if (const char* env = std::getenv("CLINX_KERNELS")) {
    if (const Backend* b = lookup(env)) return b;
  }
#ifdef CLINX_HAVE_AVX2_BUILD
  if (__builtin_cpu_supports("avx2")) return &kAvx2;
#endif
#ifdef CLINX_HAVE_NEON_BUILD
  return &kNeon;
#endif
  return &kScalar;
}

const Backend*& current() {
  static const Backend* backend = detect();
  return backend;
}

}  // namespace

const std::string& active_backend() {
  static std::string name;
  name = current()->name;
  return name;
}

bool force_backend(const std::string& name) {
  const Backend* b = lookup(name);
  if (!b) return false;
  current() = b;
  return true;
}

double dot(const double* a, const double* b, std::size_t n) {
  return current()->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  current()->axpy(alpha, x, y, n);
}

void scale(double alpha, double* x, std::size_t n) {
  current()->scale(alpha, x, n);
}

double sum_squares(const double* x, std::size_t n) {
  return current()->sum_squares(x, n);
}

void adagrad_update(double* param, double* accum, const double* grad,
                    std::size_t n, double lr, double eps) {
  current()->adagrad_update(param, accum, grad, n, lr, eps);
}

}  // namespace clinx::kernels
