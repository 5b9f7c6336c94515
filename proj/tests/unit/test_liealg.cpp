#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lieexp/liealg.hpp"

using namespace lieexp;

namespace {

constexpr double kPi = std::numbers::pi;

// Pointwise evaluation of a field f(theta) d/dtheta and of f'(theta).
cplx eval(const VectField& f, double th) {
  cplx s = 0;
  for (const auto& [n, a] : f.coeffs) s += a * std::polar(1.0, n * th);
  return s;
}
cplx eval_d(const VectField& f, double th) {
  cplx s = 0;
  for (const auto& [n, a] : f.coeffs) s += a * cplx(0, n) * std::polar(1.0, n * th);
  return s;
}

VectField random_field(std::mt19937_64& rng, int deg) {
  std::normal_distribution<double> g;
  VectField f;
  for (int n = -deg; n <= deg; ++n) f.coeffs[n] = {g(rng), g(rng)};
  return f;
}

QVectField random_qfield(std::mt19937_64& rng, int deg) {
  std::uniform_int_distribution<long> u(-5, 5);
  QVectField f;
  for (int n = -deg; n <= deg; ++n) f.coeffs[n] = QComplex(Rational(u(rng)), Rational(u(rng)));
  return f;
}

}  // namespace

TEST_CASE("field bracket matches the pointwise vector-field bracket") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const VectField f = random_field(rng, 3), g = random_field(rng, 2);
    const VectField b = bracket_vect(f, g);
    for (double th : {0.1, 1.3, 2.9, 4.4}) {
      const cplx want = eval_d(f, th) * eval(g, th) - eval(f, th) * eval_d(g, th);
      CHECK(std::abs(eval(b, th) - want) < 1e-10 * (1 + std::abs(want)));
    }
  }
}

TEST_CASE("L_n convention: [L_m, L_n] = (m - n) L_{m+n}") {
  for (int m = -3; m <= 3; ++m)
    for (int n = -3; n <= 3; ++n) {
      const QVectField b = bracket_vect(QVectField::L(m), QVectField::L(n));
      const QVectField want = QComplex(Rational(m - n)) * QVectField::L(m + n);
      CHECK(b == want);
    }
}

TEST_CASE("Virasoro cocycle is antisymmetric and satisfies the cocycle identity exactly") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    const QVectField x = random_qfield(rng, 3), y = random_qfield(rng, 3), z = random_qfield(rng, 3);
    CHECK(virasoro_cocycle(x, y) == -virasoro_cocycle(y, x));
    const QComplex s = virasoro_cocycle(bracket_vect(x, y), z) + virasoro_cocycle(bracket_vect(y, z), x) +
                       virasoro_cocycle(bracket_vect(z, x), y);
    CHECK(s == QComplex());
  }
  // omega(e_m, e_{-m}) = -(m^3 - m)/12.
  CHECK(virasoro_cocycle(QVectField::mode(3), QVectField::mode(-3)) == QComplex(Rational(-2)));
}

TEST_CASE("central bracket satisfies Jacobi exactly for fields and loops") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 4; ++k) {
    const QCentralElement x = QCentralElement::of(random_qfield(rng, 2));
    const QCentralElement y = QCentralElement::of(random_qfield(rng, 2));
    const QCentralElement z = QCentralElement::of(random_qfield(rng, 2));
    const QCentralElement j = central_bracket(x, central_bracket(y, z)) + central_bracket(y, central_bracket(z, x)) +
                              central_bracket(z, central_bracket(x, y));
    CHECK(j.vect == QVectField());
  }
  const AlgebraPtr g = FiniteLieAlgebra::sl2();
  std::uniform_int_distribution<long> u(-3, 3);
  auto rl = [&] {
    QLoopElement l(g);
    for (int n = -2; n <= 2; ++n)
      for (int i = 0; i < 3; ++i) l += QLoopElement::basis(g, i, n, QComplex(Rational(u(rng))));
    QCentralElement c = QCentralElement::of(l);
    c.vect = random_qfield(rng, 1);
    return c;
  };
  for (int k = 0; k < 3; ++k) {
    const QCentralElement x = rl(), y = rl(), z = rl();
    const QCentralElement j = central_bracket(x, central_bracket(y, z)) + central_bracket(y, central_bracket(z, x)) +
                              central_bracket(z, central_bracket(x, y));
    CHECK(j.loop == QLoopElement(g));
    CHECK(j.vect == QVectField());
  }
}

TEST_CASE("loop cocycle equals (1/2 pi i) int <x', y> dtheta") {
  const AlgebraPtr g = FiniteLieAlgebra::sl2();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  LoopElement x(g), y(g);
  for (int n = -2; n <= 2; ++n)
    for (int i = 0; i < 3; ++i) {
      x += LoopElement::basis(g, i, n, cplx(nd(rng), nd(rng)));
      y += LoopElement::basis(g, i, n, cplx(nd(rng), nd(rng)));
    }
  const int pts = 64;
  cplx integral = 0;
  for (int k = 0; k < pts; ++k) {
    const double th = 2 * kPi * k / pts;
    std::vector<cplx> dx(3, 0.0), vy(3, 0.0);
    for (const auto& [n, v] : x.coeffs)
      for (int i = 0; i < 3; ++i) dx[i] += v[i] * cplx(0, n) * std::polar(1.0, n * th);
    for (const auto& [n, v] : y.coeffs)
      for (int i = 0; i < 3; ++i) vy[i] += v[i] * std::polar(1.0, n * th);
    integral += algebra_form(*g, dx, vy);
  }
  integral *= 2 * kPi / pts;
  const cplx want = integral / (2 * kPi * I_UNIT);
  CHECK(std::abs(loop_cocycle(x, y) - want) < 1e-10);
}

TEST_CASE("finite algebras are valid Lie algebras") {
  for (const auto& g : {FiniteLieAlgebra::sl2(), FiniteLieAlgebra::su2()}) {
    CHECK(g->antisymmetry_residual() == 0);
    CHECK(g->jacobi_residual() == 0);
    CHECK(g->invariance_residual() == 0);
  }
  const auto su2 = FiniteLieAlgebra::su2();
  CHECK(su2->f(0, 1, 2) == 1);
  CHECK(su2->f(1, 2, 0) == 1);
  CHECK(su2->f(2, 0, 1) == 1);
}

TEST_CASE("seminorms and the L0 commutator") {
  VectField f;
  f.coeffs[2] = cplx(3, 4);
  f.coeffs[-1] = 1.0;
  CHECK(seminorm(f, 0.0) == doctest::Approx(6.0));
  CHECK(seminorm(f, 1.0) == doctest::Approx(3 * 5.0 + 2 * 1.0));
  const CentralElement c = l0_commutator(CentralElement::of(f));
  CHECK(c.vect.at(2) == cplx(-6, -8));
  CHECK(c.vect.at(-1) == cplx(1, 0));
}

TEST_CASE("reality: a_{-n} = conj(a_n)") {
  VectField f = VectField::mode(2, cplx(1, 2)) + VectField::mode(-2, cplx(1, -2));
  CHECK(f.is_real());
  f.coeffs[0] = I_UNIT;
  CHECK_FALSE(f.is_real());
}

TEST_CASE("Number parses exact rationals and decimals") {
  CHECK(Number::parse("1/2").exact() == Rational(1, 2));
  CHECK(Number::parse("0.3").exact() == frac(3, 10));
  CHECK(Number::parse("-7").exact() == -7);
  CHECK(Number::parse("1/16").value() == doctest::Approx(0.0625));
  CHECK_THROWS_AS(Number::parse("abc"), ValidationError);
}

TEST_CASE("kind mismatches are rejected") {
  const CentralElement a = CentralElement::of(VectField::mode(1));
  const CentralElement b = CentralElement::of(LoopElement::basis(FiniteLieAlgebra::sl2(), 0, 1));
  CHECK_THROWS_AS(central_bracket(a, b), KindMismatch);
}
