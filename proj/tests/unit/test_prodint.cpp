#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lieexp/linalg.hpp"
#include "lieexp/prodint.hpp"
#include "lieexp/scale.hpp"

using namespace lieexp;

namespace {

ModulePtr ising_sigma(int N) { return build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), N)); }

// Random dense test generator: skew-hermitian, fixed seed.
MatrixXcd skew(int n, unsigned seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * cplx(g(rng), g(rng));
  return a - a.adjoint();
}

}  // namespace

TEST_CASE("constant path: the product integral is the exponential") {
  const ModulePtr m = ising_sigma(6);
  const CentralElement x = CentralElement::of(VectField::mode(1) + VectField::mode(-1));
  const Propagator p = product_integral(*m, GeneratorPath::constant_path(x, 0.0, 0.7));
  CHECK(opnorm(p.U - expm(0.7 * assemble_pi(*m, x))) < 1e-11);
}

TEST_CASE("commuting path: closed form exp(int X)") {
  const MatrixXcd s = skew(6, 1, 0.5);
  OperatorPath path{[&](double t) -> MatrixXcd { return std::cos(3 * t) * s; }, 0.0, 1.0, false};
  ProductIntegralOptions opt;
  opt.tol = 1e-11;
  const Propagator p = product_integral(path, VectorXd(), opt);
  CHECK(opnorm(p.U - expm(std::sin(3.0) / 3.0 * s)) < 1e-9);
}

TEST_CASE("step products converge at the rule's order") {
  const MatrixXcd s1 = skew(5, 2, 0.4), s2 = skew(5, 3, 0.4);
  OperatorPath path{[&](double t) -> MatrixXcd { return std::cos(t) * s1 + std::sin(2 * t) * s2; }, 0.0, 1.0, false};
  const MatrixXcd ref = step_product(path, StepSubdivision::uniform(0, 1, 2048, SampleRule::Magnus4)).U;
  auto err = [&](long n, SampleRule r) { return opnorm(step_product(path, StepSubdivision::uniform(0, 1, n, r)).U - ref); };
  const double left = std::log2(err(32, SampleRule::Left) / err(64, SampleRule::Left));
  const double mid = std::log2(err(32, SampleRule::Midpoint) / err(64, SampleRule::Midpoint));
  const double mag = std::log2(err(8, SampleRule::Magnus4) / err(16, SampleRule::Magnus4));
  CHECK(left == doctest::Approx(1.0).epsilon(0.05));
  CHECK(mid == doctest::Approx(2.0).epsilon(0.05));
  CHECK(mag == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("semigroup and inversion identities") {
  const ModulePtr m = ising_sigma(8);
  const GeneratorPath p = oscillatory_path(0.0, 1.0);
  ProductIntegralOptions opt;
  opt.tol = 1e-10;
  CHECK(semigroup_residual(*m, p, 0.37, opt) < 1e-8);
  CHECK(inversion_residual(*m, p, opt) < 1e-8);
  const Propagator u = product_integral(*m, p, opt);
  CHECK(unitarity_defect(u.U) < 1e-11);
}

TEST_CASE("change of variables") {
  const ModulePtr m = ising_sigma(6);
  Reparametrization r{[](double s) { return s * s; }, [](double s) { return 2 * s; }, 0.0, 1.0};
  ProductIntegralOptions opt;
  opt.tol = 1e-10;
  CHECK(change_of_variable_check(*m, oscillatory_path(), r, opt) < 1e-7);
}

TEST_CASE("cumulative Simpson is exact on cubics") {
  const int n = 9;
  const double h = 0.125;
  std::vector<VectorXcd> f;
  for (int i = 0; i < n; ++i) {
    const double t = i * h;
    VectorXcd v(1);
    v(0) = t * t * t - 2 * t + 1;
    f.push_back(v);
  }
  const auto F = cumulative_simpson(f, h);
  for (int i = 0; i < n; ++i) {
    const double t = i * h;
    CHECK(std::abs(F[static_cast<size_t>(i)](0) - (t * t * t * t / 4 - t * t + t)) < 1e-13);
  }
}

TEST_CASE("inhomogeneous equation: constant generator closed form (e^{tS} - 1) S^{-1} eta") {
  const MatrixXcd s = skew(4, 5, 0.5) + MatrixXcd::Identity(4, 4) * cplx(0, 0.3);
  OperatorPath path{[&](double) -> MatrixXcd { return s; }, 0.0, 1.0, true};
  VectorXcd eta = VectorXcd::Ones(4);
  const VectorXcd want = (expm(s) - MatrixXcd::Identity(4, 4)) * s.inverse() * eta;
  auto err = [&](int intervals) {
    const Trajectory tr = solve_inhomogeneous(path, [&](double) { return eta; }, uniform_grid(0, 1, intervals));
    return (tr.xi.back() - want).norm();
  };
  const double e32 = err(32), e64 = err(64);
  // Simpson quadrature: fourth order.
  CHECK(std::log2(e32 / e64) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e64 < 1e-8);
}

TEST_CASE("homogeneous trajectory solves its equation and conserves norm") {
  const ModulePtr m = ising_sigma(12);
  VectorXcd xi0 = VectorXcd::Zero(m->total);
  xi0(0) = 1;
  TrajectoryOptions opt;
  opt.leakage_limit = 1e-3;
  const Trajectory tr = solve_homogeneous(*m, oscillatory_path(), xi0, uniform_grid(0, 1, 64), opt);
  CHECK(tr.norm_drift() < 1e-9);
  CHECK(equation_residual(OperatorPath::from(*m, oscillatory_path()), tr) < 1e-4);
  CHECK(tr.max_leakage() <= 1e-3);
}

TEST_CASE("leakage monitor raises TruncationOverflow") {
  const ModulePtr m = ising_sigma(6);
  VectorXcd xi0 = VectorXcd::Zero(m->total);
  xi0(0) = 1;
  TrajectoryOptions opt;
  opt.leakage_limit = 1e-30;
  CHECK_THROWS_AS(solve_homogeneous(*m, oscillatory_path().scaled(3.0), xi0, uniform_grid(0, 1, 16), opt),
                  TruncationOverflow);
}

TEST_CASE("Dyson partial sums converge at order k + 1") {
  const ModulePtr m = ising_sigma(8);
  VectorXcd xi0 = VectorXcd::Zero(m->total);
  xi0(0) = 1;
  const GeneratorPath p = oscillatory_path();
  ProductIntegralOptions opt;
  opt.tol = 1e-11;
  for (int k = 1; k <= 2; ++k) {
    auto err = [&](double h) {
      return (dyson_expansion(*m, p, xi0, k, h) - product_integral(*m, p.scaled(h), opt).U * xi0).norm();
    };
    CHECK(std::log2(err(0.1) / err(0.05)) == doctest::Approx(k + 1.0).epsilon(0.1));
  }
}

TEST_CASE("refinement differences sit below the a priori bound") {
  const ModulePtr m = ising_sigma(8);
  ProductIntegralOptions opt;
  opt.rule = SampleRule::Left;
  opt.record_bound = true;
  opt.tol = 1e-3;
  opt.dense_history = true;
  const Propagator p = product_integral(*m, oscillatory_path(), opt);
  REQUIRE(!p.history.empty());
  for (const auto& lv : p.history) CHECK(lv.difference <= lv.bound);
}

TEST_CASE("validation and refinement limits") {
  StepSubdivision bad;
  bad.tau = {0.0, 0.5, 0.5, 1.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(sample_rule_from_string("simpson"), ValidationError);
  CHECK(sample_rule_from_string(to_string(SampleRule::Magnus4)) == SampleRule::Magnus4);
  const ModulePtr m = ising_sigma(6);
  ProductIntegralOptions opt;
  opt.rule = SampleRule::Left;
  opt.tol = 1e-14;
  opt.max_steps = 64;
  CHECK_THROWS_AS(product_integral(*m, oscillatory_path(), opt), MaxRefinementExceeded);
}

TEST_CASE("Gateaux derivative matches a finite difference") {
  const ModulePtr m = build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), 12));
  VectorXcd xi0 = VectorXcd::Zero(m->total);
  xi0(0) = 1;
  const GeneratorPath p = oscillatory_path();
  const GeneratorPath delta = GeneratorPath::constant_path(CentralElement::of(VectField::mode(0, cplx(1.0))));
  const auto grid = uniform_grid(0, 1, 32);
  TrajectoryOptions opt;
  opt.leakage_limit = 0.1;
  const Trajectory d = gateaux_derivative(*m, p, xi0, delta, grid, opt);
  const double eps = 1e-4;
  GeneratorPath plus = p, minus = p;
  plus.at = [&](double t) { return p.at(t) + eps * delta.at(t); };
  minus.at = [&](double t) { return p.at(t) + (-eps) * delta.at(t); };
  const VectorXcd fd = (solve_homogeneous(*m, plus, xi0, grid, opt).xi.back() -
                        solve_homogeneous(*m, minus, xi0, grid, opt).xi.back()) / (2 * eps);
  CHECK((d.xi.back() - fd).norm() < 1e-5 * fd.norm());
}
