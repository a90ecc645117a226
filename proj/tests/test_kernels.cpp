#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "camarm/kernels/kernels.hpp"

using namespace camarm::kernels;

namespace {

std::vector<double> randv(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Naive triple loop, written independently of the scalar kernel.
double ref_at(const std::vector<double>& a, const std::vector<double>& b, std::size_t i, std::size_t j, std::size_t m,
              std::size_t k, std::size_t n, char mode) {
  double s = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double x = mode == 't' ? a[p * m + i] : a[i * k + p];
    const double y = mode == 'n' || mode == 't' ? b[p * n + j] : b[j * k + p];
    s += x * y;
  }
  return s;
}

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> v{&scalar_table()};
  for (Isa i : {Isa::Avx2, Isa::Neon})
    if (const KernelTable* t = isa_table(i)) v.push_back(t);
  return v;
}

}  // namespace

TEST_CASE("dot and axpy agree with the scalar reference on ragged lengths") {
  std::mt19937_64 rng(1);
  for (const KernelTable* t : variants()) {
    CAPTURE(isa_name(t->isa));
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 63u, 100u, 257u}) {
      auto a = randv(rng, n), b = randv(rng, n);
      const double ref = scalar::dot(a.data(), b.data(), n);
      CHECK(std::abs(t->dot(a.data(), b.data(), n) - ref) <= 1e-12 * (1.0 + std::abs(ref)) * std::sqrt(n + 1.0));
      auto y1 = b, y2 = b;
      scalar::axpy(0.37, a.data(), y1.data(), n);
      t->axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("gemm variants match a naive product") {
  std::mt19937_64 rng(2);
  for (const KernelTable* t : variants()) {
    CAPTURE(isa_name(t->isa));
    for (auto [m, k, n] : {std::array<std::size_t, 3>{1, 1, 1}, {3, 5, 7}, {8, 8, 8}, {13, 17, 9}, {16, 33, 20}, {6, 64, 15}}) {
      auto a = randv(rng, m * k), bnn = randv(rng, k * n), bnt = randv(rng, n * k), c0 = randv(rng, m * n);
      auto at = randv(rng, k * m);
      for (char mode : {'n', 'x', 't'}) {
        auto c = c0;
        if (mode == 'n') t->gemm_nn(a.data(), bnn.data(), c.data(), m, k, n);
        if (mode == 'x') t->gemm_nt(a.data(), bnt.data(), c.data(), m, k, n);
        if (mode == 't') t->gemm_tn(at.data(), bnn.data(), c.data(), m, k, n);
        const auto& A = mode == 't' ? at : a;
        const auto& B = mode == 'x' ? bnt : bnn;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            CHECK(std::abs(c[i * n + j] - c0[i * n + j] - ref_at(A, B, i, j, m, k, n, mode)) < 1e-11);
      }
    }
  }
}

TEST_CASE("bound_excess variants are bit-identical") {
  std::mt19937_64 rng(3);
  for (const KernelTable* t : variants()) {
    for (std::size_t n : {1u, 4u, 6u, 9u, 33u}) {
      auto q = randv(rng, n), lo = randv(rng, n), hi = lo;
      for (auto& h : hi) h += 0.5;
      std::vector<double> e1(n), e2(n);
      scalar::bound_excess(q.data(), lo.data(), hi.data(), e1.data(), n);
      t->bound_excess(q.data(), lo.data(), hi.data(), e2.data(), n);
      CHECK(e1 == e2);
      for (std::size_t i = 0; i < n; ++i) {
        const double want = q[i] > hi[i] ? q[i] - hi[i] : q[i] < lo[i] ? q[i] - lo[i] : 0.0;
        CHECK(e1[i] == want);
      }
    }
  }
}

TEST_CASE("active table can be switched to scalar and back") {
  const Isa before = active().isa;
  CHECK(set_active(Isa::Scalar));
  CHECK(active().isa == Isa::Scalar);
  CHECK(set_active(before));
  CHECK(active().isa == before);
  if (!isa_table(Isa::Neon)) CHECK_FALSE(set_active(Isa::Neon));
}
