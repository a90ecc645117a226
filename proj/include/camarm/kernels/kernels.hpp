#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace camarm::kernels {

// Instruction-set variants. Scalar is the reference every other variant is
// tested against.
enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// Dense row-major double kernels used by the policy network and by the joint
// limit check. All GEMM variants accumulate into C.
struct KernelTable {
  Isa isa;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t k, std::size_t n);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*gemm_nt)(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t k, std::size_t n);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn)(const double* a, const double* b, double* c,
                  std::size_t m, std::size_t k, std::size_t n);

  // excess[i] = q[i] - hi[i] if q[i] > hi[i], q[i] - lo[i] if q[i] < lo[i], else 0.
  void (*bound_excess)(const double* q, const double* lo, const double* hi,
                       double* excess, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* isa_table(Isa isa);

// Table selected at first use: best supported ISA, unless CAMARM_ISA
// (scalar | avx2 | neon | auto) says otherwise.
const KernelTable& active();

// Override the active table (tests, benchmarks). Returns false if the ISA is
// unavailable on this machine; the active table is unchanged in that case.
bool set_active(Isa isa);

// Convenience wrappers over active().
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void bound_excess(const double* q, const double* lo, const double* hi, double* excess, std::size_t n);
}  // namespace scalar

}  // namespace camarm::kernels
