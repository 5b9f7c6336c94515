#include "lieexp/scale.hpp"

#include <cmath>
#include <sstream>

#include "lieexp/kernels.hpp"
#include "lieexp/linalg.hpp"

namespace lieexp {

using nlohmann::json;

double SobolevScale::norm(const VectorXcd& xi, double t) const {
  VectorXd w = a_.array().pow(2.0 * t);
  return std::sqrt(kernels::weighted_norm2(w.data(), xi.data(), static_cast<std::size_t>(xi.size())));
}

double SobolevScale::operator_norm(const MatrixXcd& m, double s, double t) const {
  VectorXcd left = power(s).cast<cplx>();
  VectorXcd right = power(-t).cast<cplx>();
  return opnorm(left.asDiagonal() * m * right.asDiagonal());
}

double sobolev_norm(const ModuleVector& xi, double t) {
  return SobolevScale(*xi.module).norm(xi.coeffs, t);
}

// ---------------------------------------------------------------------------
// Seminorm families

Seminorm Seminorm::for_module(const GradedModule& m) {
  Seminorm s;
  s.family = m.is_affine() ? SeminormFamily::GWLoop : SeminormFamily::GWVirasoro;
  s.c = m.c_value;
  s.ell = m.ell_value;
  return s;
}

double Seminorm::operator()(const CentralElement& x, double index) const {
  // Shift to the form |X|_{n+1}; negative indices use |X|_{-n} = |X|_{n+1}.
  const double n = index < 0 ? -index : index - 1.0;
  switch (family) {
    case SeminormFamily::Plain:
      return seminorm(x, index);
    case SeminormFamily::GWVirasoro: {
      const double M = std::sqrt(c / 12.0);
      return std::sqrt(2.0) * seminorm(x.vect, n) + M * (seminorm(x.vect, n + 1) + seminorm(x.vect, n + 1.5));
    }
    case SeminormFamily::GWLoop: {
      double v = dim_g * seminorm(x.vect, n + 1.5);
      if (x.loop.algebra) v += (ell + 1.0) * seminorm(x.loop, n + 0.5);
      return v;
    }
  }
  return 0.0;
}

double Seminorm::a_norm(const CentralElement& x, double index) const {
  return (*this)(l0_commutator(x), index);
}

std::string Seminorm::name() const {
  switch (family) {
    case SeminormFamily::Plain:
      return "plain";
    case SeminormFamily::GWVirasoro:
      return "gw-virasoro";
    case SeminormFamily::GWLoop:
      return "gw-loop";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Reports

bool estimate_holds(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-12) + 1e-14; }

json EstimateRow::to_json() const {
  return {{"estimate", estimate}, {"params", params}, {"lhs", lhs}, {"rhs", rhs}, {"holds", holds}, {"leakage", leakage}};
}

std::string rows_to_csv(const std::vector<EstimateRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "estimate,params,lhs,rhs,holds,leakage\n";
  for (const auto& r : rows) {
    std::string p = r.params.dump();
    std::string q;
    for (char ch : p) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    os << r.estimate << ",\"" << q << "\"," << r.lhs << "," << r.rhs << "," << (r.holds ? 1 : 0) << ","
       << r.leakage << "\n";
  }
  return os.str();
}

namespace {

EstimateRow make_row(std::string name, json params, double lhs, double rhs, double leak) {
  EstimateRow r;
  r.estimate = std::move(name);
  r.params = std::move(params);
  r.lhs = lhs;
  r.rhs = rhs;
  r.holds = estimate_holds(lhs, rhs);
  r.leakage = leak;
  return r;
}

}  // namespace

std::vector<EstimateRow> check_basic_estimates(const GradedModule& m, const CentralElement& x,
                                               const VectorXcd& xi, double n, const Seminorm& norm) {
  SobolevScale sc(m);
  MatrixXcd p = assemble_pi(m, x);
  VectorXcd px = p * xi;
  VectorXd a = m.a_diagonal();
  VectorXcd comm = a.cast<cplx>().asDiagonal() * px - p * (a.cast<cplx>().asDiagonal() * xi);
  const double leak = top_level_mass(m, px, 1);
  json params = {{"n", n}, {"seminorm", norm.name()}};
  std::vector<EstimateRow> rows;
  rows.push_back(make_row("basic-pi", params, sc.norm(px, n), norm(x, n + 1) * sc.norm(xi, n + 1), leak));
  rows.push_back(make_row("basic-commutator", params, sc.norm(comm, n), norm.a_norm(x, n + 1) * sc.norm(xi, n + 1), leak));
  return rows;
}

EstimateRow check_gw_virasoro(const GradedModule& m, const CentralElement& x, const VectorXcd& xi, double t) {
  SobolevScale sc(m);
  CentralElement base = x;
  base.central = 0;  // the estimate concerns the field part
  VectorXcd px = assemble_pi(m, base) * xi;
  const double at = std::abs(t);
  const double M = std::sqrt(m.c_value / 12.0);
  const double rhs = std::sqrt(2.0) * seminorm(x.vect, at) * sc.norm(xi, t + 1) +
                     M * seminorm(x.vect, at + 1) * sc.norm(xi, t + 0.5) +
                     M * seminorm(x.vect, at + 1.5) * sc.norm(xi, t);
  return make_row("gw-virasoro", {{"t", t}}, sc.norm(px, t), rhs, top_level_mass(m, px, 1));
}

std::vector<EstimateRow> check_gw_loop(const GradedModule& m, const LoopElement& x, const VectField& f,
                                       const VectorXcd& xi, double t) {
  if (!m.is_affine()) throw KindMismatch("check_gw_loop: module is not affine");
  SobolevScale sc(m);
  const double at = std::abs(t);
  std::vector<EstimateRow> rows;
  VectorXcd px = assemble_pi(m, CentralElement::of(x)) * xi;
  const double rhs_loop = (m.ell_value + 1.0) * seminorm(x, at + 0.5) * sc.norm(xi, t + 0.5);
  rows.push_back(make_row("gw-loop", {{"t", t}}, sc.norm(px, t), rhs_loop, top_level_mass(m, px, 1)));
  CentralElement fe = CentralElement::of(f);
  VectorXcd pf = assemble_pi(m, fe) * xi;
  const double rhs_field = 3.0 * seminorm(f, at + 1.5) * sc.norm(xi, t + 1);
  rows.push_back(make_row("gw-loop-field", {{"t", t}}, sc.norm(pf, t), rhs_field, top_level_mass(m, pf, 1)));
  return rows;
}

EstimateRow check_exp_estimate(const GradedModule& m, const CentralElement& x, double n, const Seminorm& norm) {
  SobolevScale sc(m);
  MatrixXcd u = expm(assemble_pi(m, x));
  const double lhs = sc.operator_norm(u, n, n);
  const double rhs = std::exp(2.0 * n * norm.a_norm(x, n));
  return make_row("exp-estimate", {{"n", n}, {"seminorm", norm.name()}}, lhs, rhs, 0.0);
}

EstimateRow check_exp_difference(const GradedModule& m, const CentralElement& x, const CentralElement& y,
                                 const VectorXcd& xi, double n, const Seminorm& norm) {
  SobolevScale sc(m);
  VectorXcd ux = expm(assemble_pi(m, x)) * xi;
  VectorXcd uy = expm(assemble_pi(m, y)) * xi;
  CentralElement d = x + (cplx(-1.0) * y);
  const double mx = std::max(norm.a_norm(x, n + 1), norm.a_norm(y, n + 1));
  const double rhs = norm(d, n + 1) * std::exp(2.0 * (n + 1) * mx) * sc.norm(xi, n + 1);
  return make_row("exp-difference", {{"n", n}, {"seminorm", norm.name()}}, sc.norm(ux - uy, n), rhs,
                  std::max(top_level_mass(m, ux, 1), top_level_mass(m, uy, 1)));
}

// ---------------------------------------------------------------------------
// Sampling

VectorXcd random_vector(const GradedModule& m, int max_level, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXcd v = VectorXcd::Zero(m.total);
  const int w = m.window_dim(max_level);
  for (int i = 0; i < w; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = cplx(re, im);
  }
  const double nrm = v.norm();
  if (nrm > 0) v /= nrm;
  return v;
}

VectField random_real_field(int degree, double scale, Rng& rng) {
  std::normal_distribution<double> g(0.0, scale);
  VectField f;
  const double a0 = g(rng);
  f.coeffs[0] = cplx(a0, 0.0);
  for (int n = 1; n <= degree; ++n) {
    const double re = g(rng);
    const double im = g(rng);
    f.coeffs[n] = cplx(re, im);
    f.coeffs[-n] = std::conj(f.coeffs[n]);
  }
  return f;
}

LoopElement random_real_loop(int degree, double scale, Rng& rng) {
  std::normal_distribution<double> g(0.0, scale);
  auto sl2 = FiniteLieAlgebra::sl2();
  LoopElement x(sl2);
  auto draw = [&] {
    const double re = g(rng);
    const double im = g(rng);
    return cplx(re, im);
  };
  // Mode 0: anti-hermitian element of sl2 (h coefficient imaginary, f = -conj(e)).
  {
    cplx e = draw();
    const double hi = g(rng);
    x.coeffs[0] = {e, cplx(0.0, hi), -std::conj(e)};
  }
  for (int n = 1; n <= degree; ++n) {
    std::vector<cplx> v{draw(), draw(), draw()};
    x.coeffs[n] = v;
    x.coeffs[-n] = {-std::conj(v[2]), -std::conj(v[1]), -std::conj(v[0])};
  }
  return x;
}

}  // namespace lieexp
