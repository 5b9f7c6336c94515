#include <doctest.h>

#include <random>
#include <vector>

#include "lieexp/kernels.hpp"

using namespace lieexp::kernels;

namespace {

std::vector<cplx> random_vec(std::mt19937_64& rng, size_t n) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

}  // namespace

TEST_CASE("scalar kernels against naive loops") {
  std::mt19937_64 rng(1);
  const size_t n = 37;
  const auto x = random_vec(rng, n), y = random_vec(rng, n);
  cplx dot = 0;
  for (size_t i = 0; i < n; ++i) dot += std::conj(x[i]) * y[i];
  CHECK(std::abs(scalar::cdot(x.data(), y.data(), n) - dot) < 1e-12);
  std::vector<double> w(n);
  double wn = 0;
  for (size_t i = 0; i < n; ++i) {
    w[i] = 1.0 + static_cast<double>(i);
    wn += w[i] * std::norm(x[i]);
  }
  CHECK(scalar::weighted_norm2(w.data(), x.data(), n) == doctest::Approx(wn));
}

TEST_CASE("AVX2 variants agree with the scalar reference") {
  if (!avx2_available()) {
    MESSAGE("AVX2 not available; equivalence skipped");
    return;
  }
  const Table& s = table(Isa::Scalar);
  const Table& v = table(Isa::Avx2);
  std::mt19937_64 rng(2);
  for (size_t n : {0u, 1u, 2u, 3u, 4u, 7u, 8u, 31u, 64u, 169u, 1001u}) {
    const auto x = random_vec(rng, n), y = random_vec(rng, n);
    const double tol = 1e-12 * (1.0 + static_cast<double>(n));
    CHECK(std::abs(s.cdot(x.data(), y.data(), n) - v.cdot(x.data(), y.data(), n)) < tol);
    auto y1 = y, y2 = y;
    s.caxpy(cplx(0.3, -1.2), x.data(), y1.data(), n);
    v.caxpy(cplx(0.3, -1.2), x.data(), y2.data(), n);
    for (size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-13);
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) w[i] = 1.0 + 0.5 * static_cast<double>(i);
    const double a = s.weighted_norm2(w.data(), x.data(), n), b = v.weighted_norm2(w.data(), x.data(), n);
    CHECK(std::abs(a - b) <= tol * (1.0 + a));
    for (size_t rows : {1u, 5u, 16u}) {
      const auto m = random_vec(rng, rows * n);
      std::vector<cplx> r1(rows), r2(rows);
      s.gemv(m.data(), rows, n, x.data(), r1.data());
      v.gemv(m.data(), rows, n, x.data(), r2.data());
      for (size_t i = 0; i < rows; ++i) CHECK(std::abs(r1[i] - r2[i]) < tol);
    }
  }
}

TEST_CASE("dispatcher reports a consistent ISA") {
  const Isa isa = active_isa();
  CHECK((isa == Isa::Scalar || avx2_available()));
  CHECK(&active() == &table(isa));
}
