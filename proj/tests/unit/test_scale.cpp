#include <doctest.h>

#include <cmath>

#include "lieexp/linalg.hpp"
#include "lieexp/scale.hpp"

using namespace lieexp;

namespace {

ModulePtr ising_sigma(int N) { return build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), N)); }

}  // namespace

TEST_CASE("Sobolev norms of basis vectors are powers of 1 + L0") {
  const ModulePtr m = ising_sigma(6);
  const SobolevScale s(*m);
  for (int i = 0; i < m->total; ++i) {
    VectorXcd e = VectorXcd::Zero(m->total);
    e(i) = 1;
    const double a = 1.0 + 1.0 / 16 + m->level_of(i);
    CHECK(s.norm(e, 1.5) == doctest::Approx(std::pow(a, 1.5)));
    CHECK(s.norm(e, -1.0) == doctest::Approx(1.0 / a));
  }
}

TEST_CASE("operator norms between scale spaces") {
  const ModulePtr m = ising_sigma(5);
  const SobolevScale s(*m);
  const MatrixXcd id = MatrixXcd::Identity(m->total, m->total);
  CHECK(s.operator_norm(id, 1.0, 1.0) == doctest::Approx(1.0));
  // H^1 -> H^0 norm of Id is the largest entry of A^{-1}.
  CHECK(s.operator_norm(id, 0.0, 1.0) == doctest::Approx(1.0 / (1.0 + 1.0 / 16)));
  CHECK(s.operator_norm(id, 1.0, 0.0) == doctest::Approx(1.0 + 1.0 / 16 + 5));
}

TEST_CASE("plain seminorm family agrees with the coefficient seminorm; GW families fold negative indices") {
  Rng rng(4);
  const ModulePtr m = ising_sigma(4);
  Seminorm plain;
  for (int k = 0; k < 5; ++k) {
    const CentralElement x = CentralElement::of(random_real_field(3, 1.0, rng));
    CHECK(plain(x, 1.5) == doctest::Approx(seminorm(x, 1.5)));
    CHECK(plain(x, -1.0) == doctest::Approx(seminorm(x, -1.0)));
    CHECK(plain.a_norm(x, 1.0) == doctest::Approx(seminorm(l0_commutator(x), 1.0)));
  }
  const Seminorm gw = Seminorm::for_module(*m);
  CHECK(gw.family == SeminormFamily::GWVirasoro);
  const CentralElement x = CentralElement::of(VectField::mode(2) + VectField::mode(-2));
  const double want = std::sqrt(2.0) * seminorm(x, 0.0) + std::sqrt(0.5 / 12) * (seminorm(x, 1.0) + seminorm(x, 1.5));
  CHECK(gw(x, 1.0) == doctest::Approx(want));
}

TEST_CASE("random helpers: unit vectors inside the window, real fields and loops") {
  Rng rng(5);
  const ModulePtr m = ising_sigma(6);
  for (int k = 0; k < 10; ++k) {
    const VectorXcd v = random_vector(*m, 3, rng);
    CHECK(v.norm() == doctest::Approx(1.0));
    CHECK(v.tail(m->total - m->window_dim(3)).norm() == 0.0);
    CHECK(random_real_field(4, 0.5, rng).is_real());
    CHECK(random_real_loop(2, 0.5, rng).is_real());
  }
}

TEST_CASE("property: basic and Goodman-Wallach estimates hold on random samples") {
  Rng rng(6);
  const ModulePtr m = ising_sigma(10);
  const Seminorm norm = Seminorm::for_module(*m);
  int violations = 0;
  for (int k = 0; k < 60; ++k) {
    const CentralElement x = CentralElement::of(random_real_field(2, 1.0, rng));
    const VectorXcd xi = random_vector(*m, 6, rng);
    const double n = (k % 3) * 0.5;
    for (const auto& r : check_basic_estimates(*m, x, xi, n, norm)) violations += r.holds ? 0 : 1;
    const auto gw = check_gw_virasoro(*m, x, xi, n + 1.0);
    violations += gw.holds ? 0 : 1;
    CHECK(gw.leakage == 0.0);
  }
  CHECK(violations == 0);
}

TEST_CASE("property: exponential estimates hold and the n = 0 case is an equality") {
  Rng rng(7);
  const ModulePtr m = ising_sigma(8);
  const Seminorm norm = Seminorm::for_module(*m);
  for (int k = 0; k < 10; ++k) {
    const CentralElement x = CentralElement::of(random_real_field(2, 0.3, rng));
    const CentralElement y = CentralElement::of(random_real_field(2, 0.3, rng));
    const VectorXcd xi = random_vector(*m, 4, rng);
    const EstimateRow e0 = check_exp_estimate(*m, x, 0.0, norm);
    CHECK(e0.holds);
    CHECK(e0.lhs == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(check_exp_estimate(*m, x, 1.0, norm).holds);
    CHECK(check_exp_difference(*m, x, y, xi, 1.0, norm).holds);
  }
}

TEST_CASE("property: loop estimates hold on an affine module") {
  Rng rng(8);
  const ModulePtr m = build_module(HighestWeightSpec::affine(1, 0, 6));
  for (int k = 0; k < 20; ++k) {
    const VectorXcd xi = random_vector(*m, 3, rng);
    for (const auto& r : check_gw_loop(*m, random_real_loop(1, 0.5, rng), random_real_field(1, 0.5, rng), xi, 1.0))
      CHECK(r.holds);
  }
}

TEST_CASE("estimate rows serialise") {
  EstimateRow r{"x", {{"n", 1}}, 1.0, 2.0, true, 0.0};
  const auto j = r.to_json();
  CHECK(j.at("estimate") == "x");
  CHECK(rows_to_csv({r}).find("x") != std::string::npos);
  CHECK(estimate_holds(1.0, 1.0));
  CHECK_FALSE(estimate_holds(1.1, 1.0));
}

TEST_CASE("GW families read |X|_{-n} as |X|_{n+1}") {
  const ModulePtr m = ising_sigma(4);
  const Seminorm gw = Seminorm::for_module(*m);
  const CentralElement x = CentralElement::of(VectField::mode(3) + VectField::mode(-1, cplx(0.5)));
  CHECK(gw(x, -1.0) == doctest::Approx(gw(x, 2.0)));
  CHECK(gw(x, -0.5) == doctest::Approx(gw(x, 1.5)));
}
