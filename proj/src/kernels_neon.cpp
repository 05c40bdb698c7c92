// NEON (aarch64) variants; same bitwise-parity rules as the AVX2 file.

#include "clinx/kernels.hpp"

#ifdef CLINX_HAVE_NEON_BUILD

#include <arm_neon.h>

#include <cmath>

namespace clinx::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

double sum_squares(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

void adagrad_update(double* param, double* accum, const double* grad,
                    std::size_t n, double lr, double eps) {
  const float64x2_t vlr = vdupq_n_f64(lr);
  const float64x2_t veps = vdupq_n_f64(eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t g = vld1q_f64(grad + i);
    float64x2_t acc = vaddq_f64(vld1q_f64(accum + i), vmulq_f64(g, g));
    vst1q_f64(accum + i, acc);
    float64x2_t num = vmulq_f64(vlr, g);
    float64x2_t den = vaddq_f64(vsqrtq_f64(acc), veps);
    vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), vdivq_f64(num, den)));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    accum[i] += g * g;
    param[i] -= (lr * g) / (std::sqrt(accum[i]) + eps);
  }
}

}  // namespace clinx::kernels::neon

#endif  // CLINX_HAVE_NEON_BUILD
