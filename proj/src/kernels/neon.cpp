// NEON variants (AArch64, where NEON is architecturally guaranteed).
#include <arm_neon.h>

#include "camarm/kernels/kernels.hpp"

namespace camarm::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) axpy(a[i * k + p], b + p * n, c + i * n, n);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(a + i * k, b + j * k, k);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) axpy(a[p * m + i], b + p * n, c + i * n, n);
}

void bound_excess(const double* q, const double* lo, const double* hi, double* excess, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vq = vld1q_f64(q + i);
    const float64x2_t over = vsubq_f64(vq, vld1q_f64(hi + i));
    const float64x2_t under = vsubq_f64(vq, vld1q_f64(lo + i));
    const uint64x2_t above = vcgtq_f64(over, zero);
    const uint64x2_t below = vcltq_f64(under, zero);
    float64x2_t r = vbslq_f64(below, under, zero);
    r = vbslq_f64(above, over, r);
    vst1q_f64(excess + i, r);
  }
  if (i < n) scalar::bound_excess(q + i, lo + i, hi + i, excess + i, n - i);
}

}  // namespace camarm::kernels::neon

namespace camarm::kernels {

const KernelTable& neon_table_impl() {
  static const KernelTable table{Isa::Neon,     neon::dot,     neon::axpy,        neon::gemm_nn,
                                 neon::gemm_nt, neon::gemm_tn, neon::bound_excess};
  return table;
}

}  // namespace camarm::kernels
