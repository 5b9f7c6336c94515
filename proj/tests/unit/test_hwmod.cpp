#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "../oracles/virasoro_oracle.hpp"
#include "lieexp/hwmod.hpp"

using namespace lieexp;

namespace {

std::vector<int> modes_of(const PBWMonomial& m) {
  std::vector<int> out;
  for (const auto& [g, n] : m.factors) out.push_back(n);
  return out;
}

int partitions(int n) {
  std::vector<int> p(static_cast<size_t>(n) + 1, 0);
  p[0] = 1;
  for (int k = 1; k <= n; ++k)
    for (int j = k; j <= n; ++j) p[static_cast<size_t>(j)] += p[static_cast<size_t>(j - k)];
  return p[static_cast<size_t>(n)];
}

}  // namespace

TEST_CASE("Verma basis sizes are partition numbers") {
  const Verma v = build_verma(HighestWeightSpec::virasoro(Number(Rational(7, 10)), Number(Rational(3, 5)), 8));
  for (int k = 0; k <= 8; ++k) CHECK(static_cast<int>(v.basis[static_cast<size_t>(k)].size()) == partitions(k));
}

TEST_CASE("Shapovalov form matches the symbolic oracle through level 4") {
  for (auto [c, h] : {std::pair{frac(1, 2), frac(1, 16)}, std::pair{Rational(1), Rational(0)},
                      std::pair{frac(7, 10), frac(3, 5)}, std::pair{Rational(25), frac(-1, 3)}}) {
    const Verma v = build_verma(HighestWeightSpec::virasoro(Number(c), Number(h), 4));
    oracle::VirasoroVacuum o(c, h);
    for (int k = 1; k <= 4; ++k) {
      const auto g = gram_matrix_exact(v, k);
      const auto& b = v.basis[static_cast<size_t>(k)];
      for (size_t i = 0; i < b.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) CHECK(g[i][j] == o.inner(modes_of(b[i]), modes_of(b[j])));
    }
  }
}

TEST_CASE("Shapovalov form: <L_{-n} Omega, L_{-n} Omega> = 2nh + (n^3 - n)c/12") {
  const Rational c = frac(1, 2), h = frac(1, 16);
  const Verma v = build_verma(HighestWeightSpec::virasoro(Number(c), Number(h), 5));
  for (int n = 1; n <= 5; ++n) {
    const auto& b = v.basis[static_cast<size_t>(n)];
    for (size_t i = 0; i < b.size(); ++i)
      if (b[i].factors.size() == 1) {
        Rational want = 2 * n * h + Rational(n * n * n - n) * c / 12;
        want.canonicalize();
        CHECK(gram_matrix_exact(v, n)[i][i] == want);
      }
  }
}

TEST_CASE("discrete series formulas") {
  CHECK(discrete_c(1) == frac(1, 2));
  CHECK(discrete_h(1, 2, 2) == frac(1, 16));
  CHECK(discrete_h(1, 2, 1) == frac(1, 2));
  CHECK(discrete_c(2) == frac(7, 10));
}

TEST_CASE("non-unitary weights raise NotUnitarizable; the oracle Gram has a negative eigenvalue") {
  const Rational c = frac(1, 2), h = frac(3, 10);
  oracle::VirasoroVacuum o(c, h);
  const Verma v = build_verma(HighestWeightSpec::virasoro(Number(c), Number(h), 8));
  bool negative = false;
  for (int k = 1; k <= 8 && !negative; ++k) {
    const auto& b = v.basis[static_cast<size_t>(k)];
    Eigen::MatrixXd g(b.size(), b.size());
    for (size_t i = 0; i < b.size(); ++i)
      for (size_t j = 0; j < b.size(); ++j)
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = o.inner(modes_of(b[i]), modes_of(b[j])).get_d();
    negative = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff() < -1e-12;
  }
  CHECK(negative);
  CHECK_THROWS_AS(build_module(HighestWeightSpec::virasoro(Number(c), Number(h), 8)), NotUnitarizable);
}

TEST_CASE("unitary points build and L0 is h + level") {
  for (auto [c, h] : {std::pair{frac(1, 2), frac(1, 16)}, std::pair{frac(1, 2), frac(1, 2)},
                      std::pair{Rational(1), Rational(0)}, std::pair{Rational(1), Rational(1)}}) {
    const ModulePtr m = build_module(HighestWeightSpec::virasoro(Number(c), Number(h), 8));
    const VectorXd l0 = m->l0_diagonal();
    for (int i = 0; i < m->total; ++i) CHECK(l0(i) == doctest::Approx(h.get_d() + m->level_of(i)));
    CHECK((m->L(0) - MatrixXd(l0.asDiagonal())).norm() < 1e-10);
  }
}

TEST_CASE("null vectors are quotiented: (1/2, 1/16) has a null vector at level 2") {
  const ModulePtr m = build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), 4));
  CHECK(m->dims[2] == 1);
  CHECK(m->null_counts[2] == 1);
}

TEST_CASE("Virasoro relations hold on the safe window") {
  const ModulePtr m = build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), 12));
  CHECK(virasoro_relation_residual(*m, 3) < 1e-9);
  for (int n = 1; n <= 3; ++n) CHECK((m->L(-n) - m->L(n).transpose()).norm() < 1e-12);
}

TEST_CASE("representation cocycle: [pi(X), pi(Y)] - pi([X,Y]) = i B Id on the safe window") {
  const ModulePtr m = build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), 10));
  const CentralElement x = CentralElement::of(VectField::mode(2) + VectField::mode(-2));
  const CentralElement y = CentralElement::of(VectField::mode(2, I_UNIT) + VectField::mode(-2, -I_UNIT));
  const MatrixXcd px = assemble_pi(*m, x), py = assemble_pi(*m, y);
  CentralElement bracket = central_bracket(x, y);
  bracket.central = 0;
  const MatrixXcd d = px * py - py * px - assemble_pi(*m, bracket);
  const int w = m->window_dim(m->N() - 4);
  const cplx b = representation_cocycle(*m, x, y);
  CHECK(std::abs(b.imag()) < 1e-12);
  // B(Q1, Q2) = c (m^3 - m)/6 with m = 2.
  CHECK(b.real() == doctest::Approx(0.5));
  CHECK((d.topLeftCorner(w, w) - I_UNIT * b * MatrixXcd::Identity(w, w)).norm() < 1e-9);
}

TEST_CASE("affine level one: currents, Sugawara charge and lowest L0") {
  const ModulePtr m = build_module(HighestWeightSpec::affine(1, 0, 6));
  CHECK(current_relation_residual(*m, 3) < 1e-9);
  CHECK(sugawara_current_residual(*m, 3) < 1e-8);
  CHECK(virasoro_relation_residual(*m, 3) < 1e-8);
  CHECK(extracted_central_charge(*m) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(m->L(0)).eigenvalues().minCoeff() == doctest::Approx(0.0));
  const ModulePtr m1 = build_module(HighestWeightSpec::affine(1, 1, 4));
  CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(m1->L(0)).eigenvalues().minCoeff() == doctest::Approx(0.25));
}

TEST_CASE("highest-weight spec validation") {
  CHECK_THROWS_AS(HighestWeightSpec::affine(1, 2, 4).validate(), ValidationError);
  CHECK_THROWS_AS(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), -1).validate(), ValidationError);
}

TEST_CASE("leakage monitor") {
  const ModulePtr m = build_module(HighestWeightSpec::virasoro(Number(frac(1, 2)), Number(frac(1, 16)), 6));
  VectorXcd v = VectorXcd::Zero(m->total);
  v(0) = 1;
  CHECK(top_level_mass(*m, v) == 0.0);
  v(m->total - 1) = 1;
  CHECK(top_level_mass(*m, v) == doctest::Approx(0.5));
}
