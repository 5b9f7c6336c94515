#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lieexp/grouprep.hpp"
#include "lieexp/linalg.hpp"

using namespace lieexp;

namespace {

constexpr double kPi = std::numbers::pi;

ModulePtr ising_sigma(int N) { return build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), N)); }

VectorXcd vacuum(const GradedModule& m) {
  VectorXcd v = VectorXcd::Zero(m.total);
  v(0) = 1;
  return v;
}

// B(Q1, Q2) a1 kappa int_0^1 sin(pi x) cosh(2 m a1 x) dx, integrated by hand.
double predicted_integral(double b, int m, double a1, double kappa) {
  const double w = 2.0 * m * a1;
  return b * a1 * kappa * kPi * (1.0 + std::cosh(w)) / (kPi * kPi + w * w);
}

}  // namespace

TEST_CASE("log derivative of a rigid rotation is the constant generator") {
  const GeneratorPath p = log_derivative(rigid_rotation(1.0));
  for (double t : {0.0, 0.3, 0.9}) {
    const CentralElement x = p.at(t);
    CHECK(std::abs(x.vect.at(0) - cplx(2 * kPi)) < 1e-12);
    CHECK(seminorm(x, 0.0) == doctest::Approx(2 * kPi));
  }
}

TEST_CASE("log derivative of the sine family at t = 0 is eps sin(theta)") {
  const double eps = 0.4;
  const GeneratorPath p = log_derivative(sine_family(eps), LogDerivativeOptions{7, 24, 1e-14});
  const CentralElement x = p.at(0.0);
  CHECK(std::abs(x.vect.at(1) - cplx(0, -eps / 2)) < 1e-12);
  CHECK(std::abs(x.vect.at(-1) - cplx(0, eps / 2)) < 1e-12);
  CHECK(p.at(0.7).is_real());
}

TEST_CASE("non-monotone families are rejected") {
  CHECK_THROWS_AS(log_derivative(sine_family(1.5)), NonMonotone);
}

TEST_CASE("a full rigid rotation acts by the scalar e^{2 pi i h}") {
  const ModulePtr m = ising_sigma(8);
  ProductIntegralOptions opt;
  opt.tol = 1e-12;
  const Propagator u = exponentiate_path(*m, log_derivative(rigid_rotation(1.0)), opt);
  const cplx want = std::polar(1.0, 2 * kPi / 16);
  CHECK((u.U - want * MatrixXcd::Identity(m->total, m->total)).norm() < 1e-10);
}

TEST_CASE("U_p properties and translation invariance") {
  const ModulePtr m = ising_sigma(8);
  const GeneratorPath p = log_derivative(sine_family(0.5), LogDerivativeOptions{7, 24, 1e-14});
  ProductIntegralOptions opt;
  opt.tol = 1e-10;
  const CentralElement lift = CentralElement::of(VectField::mode(0, cplx(0.3)));
  for (const auto& row : verify_up_properties(*m, p, lift, opt)) {
    INFO(row.property);
    CHECK(row.residual < 1e-7);
  }
  const double v = 0.2;
  CHECK(translation_residual(
            sine_family(0.5), [v](double th) { return v * std::sin(th); },
            [v](double th) { return v * std::cos(th); }) < 1e-9);
}

TEST_CASE("cocycle integral over the square matches the closed form") {
  const ModulePtr m = ising_sigma(6);
  for (int mm : {1, 2}) {
    const double b = 0.5 * (mm * mm * mm - mm) / 6.0;  // c (m^3 - m)/6, c = 1/2
    const double a1 = 0.1, kappa = 0.3;
    const double got = cocycle_integral(*m, sl2_flow_homotopy(mm, a1, 0.1, kappa));
    CHECK(got == doctest::Approx(predicted_integral(b, mm, a1, kappa)).epsilon(1e-9));
  }
}

TEST_CASE("extension restores flatness including the central part") {
  const ModulePtr m = ising_sigma(6);
  const FlatHomotopy h = sl2_flow_homotopy(2, 0.1, 0.1, 0.3);
  const FlatHomotopy e = extend_homotopy(*m, h);
  double before = 0, after = 0, algebra = 0;
  for (double x : {0.2, 0.5, 0.8})
    for (double y : {0.1, 0.6}) {
      before = std::max(before, curvature_residual(h, x, y, true));
      after = std::max(after, curvature_residual(e, x, y, true));
      algebra = std::max(algebra, curvature_residual(h, x, y, false));
    }
  CHECK(algebra < 1e-6);
  CHECK(after < 1e-6);
  CHECK(before > 1e-3);
  CHECK_THROWS_AS(flat_section(*m, h, vacuum(*m), 4, 4), CurvatureTooLarge);
}

TEST_CASE("holonomy: Moebius loops close, m = 2 picks up e^{i int B}") {
  const double a1 = 0.1, b1 = 0.1, kappa = 0.1;
  const HolonomyResult mob = holonomy_phase(*ising_sigma(12), sl2_flow_homotopy(1, a1, b1, kappa));
  CHECK(std::abs(mob.measured - cplx(1.0)) < 1e-5);
  const FlatHomotopy h = sl2_flow_homotopy(2, a1, b1, kappa);
  const HolonomyResult r8 = holonomy_phase(*ising_sigma(8), h);
  const HolonomyResult r12 = holonomy_phase(*ising_sigma(12), h);
  CHECK(r12.integral == doctest::Approx(predicted_integral(0.5, 2, a1, kappa)).epsilon(1e-9));
  CHECK(r8.sign == 1);
  CHECK(r12.sign == 1);
  CHECK(r12.error < r8.error);
  CHECK(r12.error < 1e-3);
}

TEST_CASE("phase chart and the local multiplication") {
  const ModulePtr m = ising_sigma(4);
  const VectorXcd xi = vacuum(*m);
  MatrixXcd swap = MatrixXcd::Identity(m->total, m->total);
  swap.row(0).swap(swap.row(1));
  CHECK_THROWS_AS(phase_function(xi, swap), OutsideChart);
  const MatrixXcd u = expm(assemble_pi(*m, CentralElement::of(VectField::mode(1, cplx(0.2)) + VectField::mode(-1, cplx(0.2)))));
  const cplx a = std::polar(1.0, 0.7);
  CHECK(std::abs(phase_function(xi, a * u) - a * phase_function(xi, u)) < 1e-12);
  const cplx l1 = local_cocycle(xi, u, u), l2 = local_cocycle(xi, a * u, std::conj(a) * u);
  CHECK(std::abs(l1 - l2) < 1e-12);
  CHECK(std::abs(std::abs(l1) - 1.0) < 1e-12);
}

TEST_CASE("extension cocycle at (1/2, 1/16): cocycle plus coboundary") {
  const ModulePtr m = ising_sigma(8);
  const CentralElement q1 = CentralElement::of(VectField::mode(2) + VectField::mode(-2));
  const CentralElement q2 = CentralElement::of(VectField::mode(2, I_UNIT) + VectField::mode(-2, -I_UNIT));
  const ExtensionCocycleResult r = extension_cocycle_check(*m, vacuum(*m), q1, q2);
  CHECK(r.cocycle_part == doctest::Approx(-0.5));
  CHECK(r.expected == doctest::Approx(-1.0));
  CHECK(r.finite_difference == doctest::Approx(r.expected).epsilon(1e-3));
}
