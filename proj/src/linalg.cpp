#include "lieexp/linalg.hpp"

#include <cmath>

#include <Eigen/LU>

#include "lieexp/kernels.hpp"

namespace lieexp {

namespace {

using Eigen::MatrixXcd;

// Pade degrees 3..13 with the backward-error thresholds of Higham (2005).
constexpr double kTheta[5] = {1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                              2.097847961257068e0, 5.371920351148152e0};
constexpr int kDegree[5] = {3, 5, 7, 9, 13};

void pade_uv(const MatrixXcd& a, int m, MatrixXcd& u, MatrixXcd& v) {
  static const double b3[] = {120, 60, 12, 1};
  static const double b5[] = {30240, 15120, 3360, 420, 30, 1};
  static const double b7[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
  static const double b9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                              2162160.,     110880.,     3960.,       90.,        1.};
  static const double b13[] = {64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
                               129060195264000.,   10559470521600.,    670442572800.,    33522128640.,
                               1323241920.,        40840800.,          960960.,          16380.,
                               182.,               1.};
  const auto n = a.rows();
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  const MatrixXcd a2 = a * a;
  if (m == 13) {
    const MatrixXcd a4 = a2 * a2;
    const MatrixXcd a6 = a4 * a2;
    const double* b = b13;
    MatrixXcd tu = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    u.noalias() = a * tu;
    v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return;
  }
  const double* b = m == 3 ? b3 : m == 5 ? b5 : m == 7 ? b7 : b9;
  MatrixXcd tu = b[1] * id;
  v = b[0] * id;
  MatrixXcd pw = id;
  for (int k = 2; k <= m; k += 2) {
    pw = (k == 2) ? a2 : MatrixXcd(pw * a2);
    tu += b[k + 1] * pw;
    v += b[k] * pw;
  }
  u.noalias() = a * tu;
}

}  // namespace

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return a;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  int m = 13;
  for (int i = 0; i < 4; ++i)
    if (norm1 <= kTheta[i]) {
      m = kDegree[i];
      break;
    }
  if (m == 13 && norm1 > kTheta[4]) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta[4]))));
  const MatrixXcd as = a / std::ldexp(1.0, s);
  MatrixXcd u, v;
  pade_uv(as, m, u, v);
  MatrixXcd r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = (r * r).eval();
  return r;
}

double opnorm(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues()(0);
}

Eigen::VectorXcd expm_action(const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& apply,
                             double norm_bound, const Eigen::VectorXcd& v) {
  if (v.size() == 0) return v;
  // Split so each piece has norm <= 1; the Taylor tail then decays at least like 1/k!.
  const int pieces = std::max(1, static_cast<int>(std::ceil(norm_bound)));
  const double inv = 1.0 / pieces;
  Eigen::VectorXcd out = v;
  Eigen::VectorXcd term(v.size()), next(v.size());
  for (int p = 0; p < pieces; ++p) {
    term = out;
    const double base = out.norm();
    for (int k = 1; k <= 80; ++k) {
      apply(term, next);
      next *= inv / k;
      std::swap(term, next);
      out += term;
      if (term.norm() <= 1e-18 * base) break;
    }
  }
  return out;
}

Eigen::VectorXcd expm_action(const Eigen::MatrixXcd& s, double dt, const Eigen::VectorXcd& v) {
  const auto n = static_cast<std::size_t>(v.size());
  if (n == 0) return v;
  const double norm1 = std::abs(dt) * s.cwiseAbs().colwise().sum().maxCoeff();
  return expm_action(
      [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
        kernels::gemv(s.data(), n, n, x.data(), y.data());
        y *= dt;
      },
      norm1, v);
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  return opnorm(u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols()));
}

}  // namespace lieexp
