#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "lieexp/linalg.hpp"
#include "lieexp/nelson.hpp"

using namespace lieexp;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("spin representations satisfy the su(2) relations") {
  const FinDimRep r = FinDimRep::make({1, 2, 3});
  CHECK(r.dim == 2 + 3 + 4);
  CHECK(r.commutation_residual() < 1e-13);
  CHECK(r.skew_residual() < 1e-13);
}

TEST_CASE("Casimir: A = 1 + j(j+1) on each block") {
  const FinDimRep r = FinDimRep::make({0, 1, 4});
  const MatrixXcd a = scale_operator(r);
  const VectorXd d = scale_diagonal(r);
  CHECK((a - MatrixXcd(d.cast<cplx>().asDiagonal())).norm() < 1e-12);
  int k = 0;
  for (int tj : r.two_j) {
    const double j = tj / 2.0;
    for (int i = 0; i <= tj; ++i) CHECK(d(k++) == doctest::Approx(1.0 + j * (j + 1)));
  }
}

TEST_CASE("axis_angle agrees with the matrix exponential") {
  const FinDimRep r = FinDimRep::make({1, 2, 5});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 5; ++k) {
    Vector3d axis(g(rng), g(rng), g(rng));
    axis.normalize();
    const double angle = 4.0 * std::abs(g(rng));
    const MatrixXcd want = (angle * r.pi(axis)).exp();
    CHECK((axis_angle(r, axis, angle) - want).norm() < 1e-11);
  }
}

TEST_CASE("a full turn is -Id on half-integer spin and +Id on integer spin") {
  const FinDimRep half = FinDimRep::make({1, 3});
  const FinDimRep whole = FinDimRep::make({2, 4});
  const Vector3d z(0, 0, 1);
  CHECK((axis_angle(half, z, 2 * kPi) + MatrixXcd::Identity(half.dim, half.dim)).norm() < 1e-12);
  CHECK((axis_angle(whole, z, 2 * kPi) - MatrixXcd::Identity(whole.dim, whole.dim)).norm() < 1e-12);
}

TEST_CASE("su2_log inverts axis_angle on spin 1/2") {
  const FinDimRep r = FinDimRep::make({1});
  const Vector3d axis = Vector3d(1, -2, 0.5).normalized();
  for (double angle : {0.3, 1.7, 3.0, 5.5}) {
    const Eigen::Matrix2cd u = axis_angle(r, axis, angle);
    const auto [ax, an] = su2_log(u);
    CHECK((axis_angle(r, ax, an) - u).norm() < 1e-12);
  }
}

TEST_CASE("rotating axis closed form solves the equation") {
  const FinDimRep r = FinDimRep::make({1, 2});
  const Su2Path p = Su2Path::rotating_axis(2.0);
  const MatrixXcd closed = rotating_axis_closed_form(r, 2.0, 1.0);
  CHECK((reference_propagator(r, p, 4000) - closed).norm() < 1e-10);
  CHECK(unitarity_defect(closed) < 1e-13);
}

TEST_CASE("report residuals against the oracles") {
  const NelsonReport rep = exponentiate_vs_oracle(FinDimRep::make({1, 2, 3}));
  CHECK(rep.axis_angle_residual < 1e-12);
  CHECK(rep.rotating_residual < 1e-9);
  CHECK(rep.reference_residual < 1e-9);
  CHECK(rep.path_independence < 1e-6);
  CHECK(rep.homomorphism < 1e-8);
  CHECK(rep.unitarity < 1e-11);
  CHECK(rep.determinant < 1e-11);
  CHECK(rep.full_turn < 1e-12);
}

TEST_CASE("assumption constants are finite; the commutator constant vanishes") {
  for (const auto& row : verify_assumptions(FinDimRep::make({1, 2}), 3)) {
    CHECK(std::isfinite(row.pi_constant));
    CHECK(row.pi_constant > 0);
    CHECK(row.comm_constant < 1e-12);
  }
}
