#include "lieexp/nelson.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "lieexp/linalg.hpp"

namespace lieexp {

namespace {

constexpr double kPi = std::numbers::pi;

const int kCyclic[3][2] = {{1, 2}, {2, 0}, {0, 1}};  // [X_i, X_j] = X_k with k = 3 - i - j

}  // namespace

FinDimRep FinDimRep::make(std::vector<int> two_j) {
  if (two_j.empty()) throw ValidationError("FinDimRep: at least one spin is required");
  FinDimRep r;
  r.two_j = std::move(two_j);
  for (int t : r.two_j) {
    if (t < 0) throw ValidationError("FinDimRep: spins must be >= 0");
    r.offsets.push_back(r.dim);
    r.dim += t + 1;
  }
  for (auto& x : r.X) x = MatrixXcd::Zero(r.dim, r.dim);
  for (size_t b = 0; b < r.two_j.size(); ++b) {
    const double j = r.two_j[b] / 2.0;
    const int d = r.two_j[b] + 1;
    const int o = r.offsets[b];
    // Basis |m>, m = j, j-1, ..., -j; J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>.
    for (int k = 0; k < d; ++k) {
      const double mval = j - k;
      r.X[2](o + k, o + k) = cplx(0, -mval);
      if (k > 0) {
        const double c = std::sqrt(j * (j + 1) - mval * (mval + 1));
        // J1 = (J+ + J-)/2, J2 = (J+ - J-)/(2i); pi = -i J.
        const cplx jp = c;  // <m+1|J+|m>
        r.X[0](o + k - 1, o + k) += -I_UNIT * 0.5 * jp;
        r.X[0](o + k, o + k - 1) += -I_UNIT * 0.5 * jp;
        r.X[1](o + k - 1, o + k) += -I_UNIT * (jp / (2.0 * I_UNIT));
        r.X[1](o + k, o + k - 1) += -I_UNIT * (-jp / (2.0 * I_UNIT));
      }
    }
  }
  return r;
}

MatrixXcd FinDimRep::pi(const Vector3d& c) const { return c(0) * X[0] + c(1) * X[1] + c(2) * X[2]; }

double FinDimRep::commutation_residual() const {
  double worst = 0;
  for (int k = 0; k < 3; ++k) {
    const int i = kCyclic[k][0], j = kCyclic[k][1];
    const MatrixXcd c = X[static_cast<size_t>(i)] * X[static_cast<size_t>(j)] -
                        X[static_cast<size_t>(j)] * X[static_cast<size_t>(i)] - X[static_cast<size_t>(k)];
    worst = std::max(worst, opnorm(c));
  }
  return worst;
}

double FinDimRep::skew_residual() const {
  double worst = 0;
  for (const auto& x : X) worst = std::max(worst, (x + x.adjoint()).cwiseAbs().maxCoeff());
  return worst;
}

MatrixXcd laplacian(const FinDimRep& r) {
  MatrixXcd d = MatrixXcd::Zero(r.dim, r.dim);
  for (const auto& x : r.X) d += x * x;
  return d;
}

MatrixXcd scale_operator(const FinDimRep& r) { return MatrixXcd::Identity(r.dim, r.dim) - laplacian(r); }

VectorXd scale_diagonal(const FinDimRep& r) {
  VectorXd a(r.dim);
  for (size_t b = 0; b < r.two_j.size(); ++b) {
    const double j = r.two_j[b] / 2.0;
    a.segment(r.offsets[b], r.two_j[b] + 1).setConstant(1.0 + j * (j + 1));
  }
  return a;
}

std::vector<AssumptionRow> verify_assumptions(const FinDimRep& r, int n_max, double scale) {
  const MatrixXcd a = scale_operator(r);
  const VectorXd ad = a.diagonal().real();
  std::vector<AssumptionRow> rows;
  for (int k = 0; k < 3; ++k) {
    const MatrixXcd px = scale * r.X[static_cast<size_t>(k)];
    const MatrixXcd comm = a * px - px * a;
    for (int n = 0; n <= n_max; ++n) {
      const VectorXcd left = ad.array().pow(n).cast<cplx>();
      const VectorXcd right = ad.array().pow(-n - 1.0).cast<cplx>();
      AssumptionRow row;
      row.basis = k + 1;
      row.n = n;
      row.pi_constant = opnorm(left.asDiagonal() * px * right.asDiagonal());
      row.comm_constant = opnorm(left.asDiagonal() * comm * right.asDiagonal());
      rows.push_back(row);
    }
  }
  return rows;
}

Su2Path Su2Path::constant_path(const Vector3d& c, double a, double b) {
  Su2Path p;
  p.at = [c](double) { return c; };
  p.a = a;
  p.b = b;
  p.constant = true;
  return p;
}

Su2Path Su2Path::rotating_axis(double w) {
  Su2Path p;
  p.at = [w](double t) { return Vector3d(std::cos(w * t), std::sin(w * t), 0.0); };
  return p;
}

OperatorPath to_operator_path(const FinDimRep& r, const Su2Path& p) {
  OperatorPath op;
  op.a = p.a;
  op.b = p.b;
  op.constant = p.constant;
  auto f = p.at;
  auto rep = std::make_shared<FinDimRep>(r);
  op.at = [f, rep](double t) { return rep->pi(f(t)); };
  return op;
}

MatrixXcd axis_angle(const FinDimRep& r, const Vector3d& axis, double angle) {
  MatrixXcd u = MatrixXcd::Zero(r.dim, r.dim);
  const double len = axis.norm();
  if (len == 0 || angle == 0) return MatrixXcd::Identity(r.dim, r.dim);
  const Vector3d n = axis / len;
  const double th = angle * len;
  // n . J on each block has eigenvalues m = -j..j; exp(-i th n.J) = sum_m e^{-i th m} P_m.
  const MatrixXcd nj = I_UNIT * r.pi(n);  // = n . J
  for (size_t b = 0; b < r.two_j.size(); ++b) {
    const int d = r.two_j[b] + 1;
    const int o = r.offsets[b];
    const double j = r.two_j[b] / 2.0;
    const MatrixXcd blk = nj.block(o, o, d, d);
    const MatrixXcd id = MatrixXcd::Identity(d, d);
    MatrixXcd acc = MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
      const double m = j - k;
      MatrixXcd proj = id;
      for (int l = 0; l < d; ++l) {
        if (l == k) continue;
        const double ml = j - l;
        proj = (proj * (blk - ml * id) / (m - ml)).eval();
      }
      acc += std::polar(1.0, -th * m) * proj;
    }
    u.block(o, o, d, d) = acc;
  }
  return u;
}

MatrixXcd rotating_axis_closed_form(const FinDimRep& r, double w, double t) {
  const Vector3d a(0, 0, 1);
  const Vector3d b(1, 0, -w);
  return axis_angle(r, a, w * t) * axis_angle(r, b, t);
}

MatrixXcd reference_propagator(const FinDimRep& r, const Su2Path& p, int steps) {
  MatrixXcd u = MatrixXcd::Identity(r.dim, r.dim);
  const double h = (p.b - p.a) / steps;
  for (int s = 0; s < steps; ++s) {
    const double t = p.a + s * h;
    const MatrixXcd a0 = r.pi(p.at(t));
    const MatrixXcd am = r.pi(p.at(t + 0.5 * h));
    const MatrixXcd a1 = r.pi(p.at(t + h));
    const MatrixXcd k1 = a0 * u;
    const MatrixXcd k2 = am * (u + 0.5 * h * k1);
    const MatrixXcd k3 = am * (u + 0.5 * h * k2);
    const MatrixXcd k4 = a1 * (u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

std::pair<Vector3d, double> su2_log(const Eigen::Matrix2cd& u) {
  // u = cos(th/2) - i sin(th/2) n.sigma.
  const double c = std::clamp(0.5 * u.trace().real(), -1.0, 1.0);
  const double half = std::acos(c);
  const double s = std::sin(half);
  if (s < 1e-14) return {Vector3d(0, 0, 1), 2.0 * half};
  // u_00 - u_11 = -2i s n3, u_10 = -i s (n1 + i n2).
  Vector3d n;
  n(2) = ((u(0, 0) - u(1, 1)) / (-2.0 * I_UNIT * s)).real();
  const cplx z = u(1, 0) / (-I_UNIT * s);
  n(0) = z.real();
  n(1) = z.imag();
  return {n.normalized(), 2.0 * half};
}

NelsonReport exponentiate_vs_oracle(const FinDimRep& r, const NelsonOptions& opt) {
  NelsonReport rep;
  const VectorXd ad = scale_diagonal(r);
  ProductIntegralOptions po;
  po.tol = opt.tol;
  po.rule = SampleRule::Magnus4;
  po.initial_steps = 4;
  auto track = [&](const MatrixXcd& u) {
    rep.unitarity = std::max(rep.unitarity, unitarity_defect(u));
    for (size_t b = 0; b < r.two_j.size(); ++b) {
      const int d = r.two_j[b] + 1;
      const cplx det = u.block(r.offsets[b], r.offsets[b], d, d).determinant();
      rep.determinant = std::max(rep.determinant, std::abs(std::abs(det) - 1.0));
    }
  };

  // Constant axis.
  const Vector3d axis(0.3, -0.5, 0.8);
  const Propagator uc = product_integral(to_operator_path(r, Su2Path::constant_path(axis)), ad, po);
  rep.axis_angle_residual = opnorm(uc.U - axis_angle(r, axis, 1.0));
  track(uc.U);

  // Rotating axis: closed form and RK4 reference.
  const Su2Path rot = Su2Path::rotating_axis(opt.omega);
  const Propagator ur = product_integral(to_operator_path(r, rot), ad, po);
  rep.rotating_residual = opnorm(ur.U - rotating_axis_closed_form(r, opt.omega, 1.0));
  rep.reference_residual = opnorm(ur.U - reference_propagator(r, rot, opt.reference_steps));
  track(ur.U);

  // Same endpoint through a constant path: read the element off the spin-1/2 rep.
  {
    const FinDimRep half = FinDimRep::make({1});
    const MatrixXcd uh = rotating_axis_closed_form(half, opt.omega, 1.0);
    const auto [n, th] = su2_log(uh);
    const Propagator us = product_integral(to_operator_path(r, Su2Path::constant_path(th * n)), ad, po);
    rep.path_independence = opnorm(us.U - ur.U);
    track(us.U);
  }

  // Concatenations of random smooth paths: U over [0, 2] vs U_p U_q.
  Rng rng(opt.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < opt.concatenations; ++k) {
    Vector3d c0, c1, c2;
    for (int i = 0; i < 3; ++i) {
      c0(i) = g(rng);
      c1(i) = g(rng);
      c2(i) = g(rng);
    }
    Su2Path whole;
    whole.a = 0;
    whole.b = 2;
    whole.at = [=](double t) { return Vector3d(c0 + std::sin(t) * c1 + t * t * 0.25 * c2); };
    Su2Path first = whole, second = whole;
    first.b = 1;
    second.a = 1;
    const Propagator uw = product_integral(to_operator_path(r, whole), ad, po);
    const Propagator u1 = product_integral(to_operator_path(r, first), ad, po);
    const Propagator u2 = product_integral(to_operator_path(r, second), ad, po);
    rep.homomorphism = std::max(rep.homomorphism, opnorm(uw.U - u2.U * u1.U));
    track(uw.U);
  }

  // Full turn about X_3.
  {
    const Propagator ut =
        product_integral(to_operator_path(r, Su2Path::constant_path(Vector3d(0, 0, 2.0 * kPi))), ad, po);
    double worst = 0;
    for (size_t b = 0; b < r.two_j.size(); ++b) {
      const int d = r.two_j[b] + 1;
      const double sign = r.two_j[b] % 2 ? -1.0 : 1.0;
      worst = std::max(worst, opnorm(ut.U.block(r.offsets[b], r.offsets[b], d, d) -
                                     sign * MatrixXcd::Identity(d, d)));
    }
    rep.full_turn = worst;
    track(ut.U);
  }
  return rep;
}

}  // namespace lieexp
