#include <atomic>
#include <cstdlib>
#include <string>

#include "camarm/kernels/kernels.hpp"

namespace camarm::kernels {

#if defined(__x86_64__) || defined(__i386__)
const KernelTable& avx2_table_impl();
#define CAMARM_HAVE_AVX2 1
#endif
#if defined(__aarch64__)
const KernelTable& neon_table_impl();
#define CAMARM_HAVE_NEON 1
#endif

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar,     scalar::dot,     scalar::axpy,        scalar::gemm_nn,
                                 scalar::gemm_nt, scalar::gemm_tn, scalar::bound_excess};
  return table;
}

const KernelTable* isa_table(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &scalar_table();
    case Isa::Avx2:
#ifdef CAMARM_HAVE_AVX2
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2_table_impl();
#endif
      return nullptr;
    case Isa::Neon:
#ifdef CAMARM_HAVE_NEON
      return &neon_table_impl();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

namespace {

const KernelTable* best_available() {
  if (const char* env = std::getenv("CAMARM_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2") {
      if (auto* t = isa_table(Isa::Avx2)) return t;
    }
    if (want == "neon") {
      if (auto* t = isa_table(Isa::Neon)) return t;
    }
  }
  if (auto* t = isa_table(Isa::Avx2)) return t;
  if (auto* t = isa_table(Isa::Neon)) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> s{best_available()};
  return s;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool set_active(Isa isa) {
  const KernelTable* t = isa_table(isa);
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace camarm::kernels
