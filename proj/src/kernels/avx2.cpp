// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see dispatch.cpp).
#include <immintrin.h>

#include "camarm/kernels/kernels.hpp"

namespace camarm::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) axpy(a[i * k + p], b + p * n, ci, n);
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(a + i * k, b + j * k, k);
  }
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m;
    const double* bp = b + p * n;
    for (std::size_t i = 0; i < m; ++i) axpy(ap[i], bp, c + i * n, n);
  }
}

void bound_excess(const double* q, const double* lo, const double* hi, double* excess, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vq = _mm256_loadu_pd(q + i);
    const __m256d over = _mm256_sub_pd(vq, _mm256_loadu_pd(hi + i));
    const __m256d under = _mm256_sub_pd(vq, _mm256_loadu_pd(lo + i));
    const __m256d above = _mm256_cmp_pd(over, zero, _CMP_GT_OQ);
    const __m256d below = _mm256_cmp_pd(under, zero, _CMP_LT_OQ);
    __m256d r = _mm256_and_pd(above, over);
    r = _mm256_blendv_pd(r, under, _mm256_andnot_pd(above, below));
    _mm256_storeu_pd(excess + i, r);
  }
  if (i < n) scalar::bound_excess(q + i, lo + i, hi + i, excess + i, n - i);
}

}  // namespace camarm::kernels::avx2

namespace camarm::kernels {

const KernelTable& avx2_table_impl() {
  static const KernelTable table{Isa::Avx2,     avx2::dot,     avx2::axpy,        avx2::gemm_nn,
                                 avx2::gemm_nt, avx2::gemm_tn, avx2::bound_excess};
  return table;
}

}  // namespace camarm::kernels
