#include <doctest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "lieexp/linalg.hpp"

using namespace lieexp;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

MatrixXcd random_matrix(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g;
  MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * cplx(g(rng), g(rng));
  return a;
}

}  // namespace

TEST_CASE("Pade expm agrees with Eigen's matrix exponential across norm regimes") {
  std::mt19937_64 rng(9);
  for (double scale : {1e-6, 1e-3, 0.05, 0.3, 1.0, 4.0}) {
    const MatrixXcd a = random_matrix(rng, 12, scale);
    const MatrixXcd want = a.exp();
    CHECK(opnorm(expm(a) - want) < 1e-12 * std::max(1.0, opnorm(want)));
  }
}

TEST_CASE("expm of a skew-hermitian matrix is unitary") {
  std::mt19937_64 rng(10);
  const MatrixXcd a = random_matrix(rng, 30, 2.0);
  const MatrixXcd s = a - a.adjoint();
  CHECK(unitarity_defect(expm(s)) < 1e-12);
}

TEST_CASE("expm_action matches expm times a vector") {
  std::mt19937_64 rng(11);
  const MatrixXcd a = random_matrix(rng, 20, 0.5);
  VectorXcd v = VectorXcd::Random(20);
  const VectorXcd want = expm(0.7 * a) * v;
  CHECK((expm_action(a, 0.7, v) - want).norm() < 1e-11 * want.norm());
}

TEST_CASE("opnorm is the largest singular value") {
  MatrixXcd d = MatrixXcd::Zero(3, 3);
  d(0, 0) = 2;
  d(1, 1) = cplx(0, -5);
  d(2, 2) = 1;
  CHECK(opnorm(d) == doctest::Approx(5.0));
}
