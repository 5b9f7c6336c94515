#include "lieexp/prodint.hpp"

#include <cmath>
#include <sstream>

#include "lieexp/kernels.hpp"
#include "lieexp/linalg.hpp"

namespace lieexp {

namespace {

const double kGauss = std::sqrt(3.0) / 6.0;      // Gauss nodes at 1/2 -+ sqrt(3)/6
const double kMagnusC = std::sqrt(3.0) / 12.0;   // coefficient of h^2 [A2, A1]

double norm1(const MatrixXcd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

MatrixXcd step_generator(const OperatorPath& p, double t0, double t1, SampleRule rule) {
  const double h = t1 - t0;
  switch (rule) {
    case SampleRule::Left:
      return h * p.at(t0);
    case SampleRule::Midpoint:
      return h * p.at(t0 + 0.5 * h);
    case SampleRule::Magnus4: {
      const MatrixXcd a1 = p.at(t0 + (0.5 - kGauss) * h);
      const MatrixXcd a2 = p.at(t0 + (0.5 + kGauss) * h);
      MatrixXcd om = (0.5 * h) * (a1 + a2);
      om.noalias() += (kMagnusC * h * h) * (a2 * a1);
      om.noalias() -= (kMagnusC * h * h) * (a1 * a2);
      return om;
    }
  }
  return {};
}

// exp(Omega) v for the Magnus4 generator, without forming the commutator.
VectorXcd magnus_apply(const MatrixXcd& a1, const MatrixXcd& a2, double h, const VectorXcd& v) {
  const auto n = static_cast<std::size_t>(v.size());
  VectorXcd t1(v.size()), t2(v.size()), t3(v.size());
  auto apply = [&](const VectorXcd& x, VectorXcd& y) {
    kernels::gemv(a1.data(), n, n, x.data(), t1.data());
    kernels::gemv(a2.data(), n, n, x.data(), t2.data());
    y = (0.5 * h) * (t1 + t2);
    kernels::gemv(a2.data(), n, n, t1.data(), t3.data());
    y += (kMagnusC * h * h) * t3;
    kernels::gemv(a1.data(), n, n, t2.data(), t3.data());
    y -= (kMagnusC * h * h) * t3;
  };
  const double n1 = norm1(a1), n2 = norm1(a2);
  const double bound = 0.5 * std::abs(h) * (n1 + n2) + 2.0 * kMagnusC * h * h * n1 * n2;
  return expm_action(apply, bound, v);
}

VectorXcd propagate_interval(const OperatorPath& p, double t0, double t1, int substeps, const VectorXcd& v) {
  VectorXcd out = v;
  const double h = (t1 - t0) / substeps;
  for (int s = 0; s < substeps; ++s) {
    const double a = t0 + s * h;
    if (p.constant) {
      out = expm_action(p.at(a), h, out);
      continue;
    }
    const MatrixXcd a1 = p.at(a + (0.5 - kGauss) * h);
    const MatrixXcd a2 = p.at(a + (0.5 + kGauss) * h);
    out = magnus_apply(a1, a2, h, out);
  }
  return out;
}

MatrixXcd weighted(const MatrixXcd& d, const VectorXd& a_diag, double r) {
  if (a_diag.size() == 0) return d;
  VectorXcd left = a_diag.array().pow(r).cast<cplx>();
  VectorXcd right = a_diag.array().pow(-r - 1.0).cast<cplx>();
  return left.asDiagonal() * d * right.asDiagonal();
}

// Probe vectors for the refinement metric: the lowest basis vector and a few
// fixed pseudo-random unit vectors.
MatrixXcd probe_basis(Eigen::Index n) {
  const Eigen::Index k = std::min<Eigen::Index>(n, 4);
  MatrixXcd p = MatrixXcd::Zero(n, k);
  p(0, 0) = 1.0;
  Rng rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index j = 1; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      p(i, j) = cplx(re, im);
    }
    p.col(j).normalize();
  }
  return p;
}

double probe_difference(const MatrixXcd& d, const VectorXd& a_diag, double r, const MatrixXcd& probes) {
  const MatrixXcd w = weighted(d, a_diag, r) * probes;
  double m = 0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) m = std::max(m, w.col(j).norm());
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Paths

GeneratorPath GeneratorPath::constant_path(const CentralElement& x, double a, double b) {
  GeneratorPath p;
  p.at = [x](double) { return x; };
  p.a = a;
  p.b = b;
  p.degree = x.degree();
  p.constant = true;
  CentralElement zero;
  zero.kind = x.kind;
  zero.loop.algebra = x.loop.algebra;
  p.derivative = [zero](double) { return zero; };
  return p;
}

GeneratorPath GeneratorPath::inverse() const {
  GeneratorPath p = *this;
  auto f = at;
  const double s = a + b;
  p.at = [f, s](double t) { return cplx(-1.0) * f(s - t); };
  if (derivative) {
    auto d = derivative;
    p.derivative = [d, s](double t) { return d(s - t); };
  }
  return p;
}

GeneratorPath GeneratorPath::scaled(double s) const {
  GeneratorPath p = *this;
  auto f = at;
  p.at = [f, s](double t) { return cplx(s) * f(t); };
  if (derivative) {
    auto d = derivative;
    p.derivative = [d, s](double t) { return cplx(s) * d(t); };
  }
  return p;
}

GeneratorPath GeneratorPath::restricted(double a2, double b2) const {
  if (!(a <= a2 && a2 < b2 && b2 <= b)) throw ValidationError("restricted: sub-interval outside the path interval");
  GeneratorPath p = *this;
  p.a = a2;
  p.b = b2;
  return p;
}

GeneratorPath oscillatory_path(double a, double b) {
  GeneratorPath p;
  p.a = a;
  p.b = b;
  p.degree = 1;
  p.at = [](double t) {
    VectField f;
    const double c = std::cos(t), s = std::sin(t);
    f.coeffs[1] = cplx(c, s);
    f.coeffs[-1] = cplx(c, -s);
    return CentralElement::of(f);
  };
  p.derivative = [](double t) {
    VectField f;
    const double c = std::cos(t), s = std::sin(t);
    f.coeffs[1] = cplx(-s, c);
    f.coeffs[-1] = cplx(-s, -c);
    return CentralElement::of(f);
  };
  return p;
}

OperatorPath OperatorPath::from(const GradedModule& m, const GeneratorPath& p) {
  OperatorPath op;
  op.a = p.a;
  op.b = p.b;
  op.constant = p.constant;
  auto f = p.at;
  const GradedModule* mp = &m;
  if (p.constant) {
    auto x = std::make_shared<MatrixXcd>(assemble_pi(m, f(p.a)));
    op.at = [x](double) { return *x; };
  } else {
    op.at = [f, mp](double t) { return assemble_pi(*mp, f(t)); };
  }
  return op;
}

std::string to_string(SampleRule r) {
  switch (r) {
    case SampleRule::Left:
      return "left";
    case SampleRule::Midpoint:
      return "midpoint";
    case SampleRule::Magnus4:
      return "magnus4";
  }
  return "?";
}

SampleRule sample_rule_from_string(const std::string& s) {
  if (s == "left") return SampleRule::Left;
  if (s == "midpoint") return SampleRule::Midpoint;
  if (s == "magnus4") return SampleRule::Magnus4;
  throw ValidationError("unknown sample rule '" + s + "' (left | midpoint | magnus4)");
}

StepSubdivision StepSubdivision::uniform(double a, double b, long n, SampleRule rule) {
  if (n < 1) throw ValidationError("subdivision needs at least one step");
  StepSubdivision s;
  s.rule = rule;
  s.tau.resize(static_cast<size_t>(n) + 1);
  for (long j = 0; j <= n; ++j) s.tau[static_cast<size_t>(j)] = a + (b - a) * static_cast<double>(j) / static_cast<double>(n);
  s.tau.back() = b;
  return s;
}

void StepSubdivision::validate() const {
  if (tau.size() < 2) throw ValidationError("subdivision needs at least two breakpoints");
  for (size_t j = 1; j < tau.size(); ++j)
    if (!(tau[j] > tau[j - 1])) throw ValidationError("subdivision breakpoints must increase strictly");
}

// ---------------------------------------------------------------------------
// Step products and refinement

Propagator step_product(const OperatorPath& path, const StepSubdivision& sub) {
  sub.validate();
  Propagator out;
  out.a = sub.tau.front();
  out.b = sub.tau.back();
  out.steps = static_cast<long>(sub.tau.size()) - 1;
  out.rule = sub.rule;
  if (path.constant) {
    // All factors commute.
    out.U = expm((out.b - out.a) * path.at(out.a));
    return out;
  }
  for (size_t j = 1; j < sub.tau.size(); ++j) {
    MatrixXcd e = expm(step_generator(path, sub.tau[j - 1], sub.tau[j], sub.rule));
    if (j == 1)
      out.U = std::move(e);
    else
      out.U = (e * out.U).eval();
  }
  return out;
}

Propagator step_product(const GradedModule& m, const GeneratorPath& path, const StepSubdivision& sub) {
  return step_product(OperatorPath::from(m, path), sub);
}

double refinement_bound(const GeneratorPath& path, long n, double r, const Seminorm& norm) {
  const double len = path.b - path.a;
  const double h = len / static_cast<double>(n);
  double sup = 0, amax = 0;
  for (long j = 0; j < n; ++j) {
    const double t = path.a + h * static_cast<double>(j);
    const CentralElement x0 = path.at(t);
    const CentralElement x1 = path.at(t + 0.5 * h);
    sup = std::max(sup, norm(x1 + (cplx(-1.0) * x0), r + 1));
    amax = std::max({amax, norm.a_norm(x0, r + 1), norm.a_norm(x1, r + 1)});
  }
  return len * sup * std::exp(2.0 * (r + 1) * len * amax);
}

namespace {

Propagator refine(const OperatorPath& path, const VectorXd& a_diag, const ProductIntegralOptions& opt,
                  const std::function<double(long)>& bound) {
  if (!(opt.tol > 0)) throw ValidationError("product_integral: tol must be positive");
  if (opt.initial_steps < 1) throw ValidationError("product_integral: initial_steps must be >= 1");
  if (path.constant) {
    Propagator p = step_product(path, StepSubdivision::uniform(path.a, path.b, 1, opt.rule));
    p.r = opt.r;
    RefinementLevel lvl;
    lvl.steps = 1;
    lvl.dense = true;
    if (bound) lvl.bound = bound(1);
    p.history.push_back(lvl);
    return p;
  }
  long n = opt.initial_steps;
  Propagator coarse = step_product(path, StepSubdivision::uniform(path.a, path.b, n, opt.rule));
  const MatrixXcd probes = probe_basis(coarse.U.rows());
  std::vector<RefinementLevel> history;
  // Differences stop shrinking once they reach the round-off floor.
  int stalled = 0;
  double previous = std::numeric_limits<double>::infinity();
  while (true) {
    if (2 * n > opt.max_steps)
      throw MaxRefinementExceeded("product_integral: no convergence to tol " + std::to_string(opt.tol) +
                                  " within " + std::to_string(opt.max_steps) + " steps");
    Propagator fine = step_product(path, StepSubdivision::uniform(path.a, path.b, 2 * n, opt.rule));
    const MatrixXcd d = fine.U - coarse.U;
    RefinementLevel lvl;
    lvl.steps = 2 * n;
    if (opt.dense_history) {
      lvl.difference = opnorm(weighted(d, a_diag, opt.r));
      lvl.dense = true;
    } else {
      lvl.difference = probe_difference(d, a_diag, opt.r, probes);
    }
    if (bound) lvl.bound = bound(n);
    bool done = false;
    if (lvl.difference < opt.tol) {
      if (!lvl.dense) {
        lvl.difference = opnorm(weighted(d, a_diag, opt.r));
        lvl.dense = true;
      }
      done = lvl.difference < opt.tol;
    }
    history.push_back(lvl);
    stalled = (!done && 2 * n >= 64 && lvl.difference > 0.7 * previous) ? stalled + 1 : 0;
    previous = lvl.difference;
    if (stalled >= 3)
      throw MaxRefinementExceeded("product_integral: refinement stalled at difference " +
                                  std::to_string(lvl.difference) + " above tol " + std::to_string(opt.tol));
    if (done) {
      fine.r = opt.r;
      fine.refinement_error = lvl.difference;
      fine.history = std::move(history);
      return fine;
    }
    coarse = std::move(fine);
    n *= 2;
  }
}

}  // namespace

Propagator product_integral(const OperatorPath& path, const VectorXd& a_diag, const ProductIntegralOptions& opt) {
  return refine(path, a_diag, opt, nullptr);
}

Propagator product_integral(const GradedModule& m, const GeneratorPath& path, const ProductIntegralOptions& opt) {
  std::function<double(long)> bound;
  if (opt.record_bound) {
    if (opt.rule != SampleRule::Left)
      throw ValidationError("product_integral: the difference bound applies to the left rule only");
    Seminorm norm = opt.seminorm ? *opt.seminorm : Seminorm::for_module(m);
    bound = [path, norm, r = opt.r](long n) { return refinement_bound(path, n, r, norm); };
  }
  return refine(OperatorPath::from(m, path), m.a_diagonal(), opt, bound);
}

// ---------------------------------------------------------------------------
// Trajectories

double Trajectory::max_leakage() const {
  double m = 0;
  for (double l : leakage) m = std::max(m, l);
  return m;
}

double Trajectory::norm_drift() const {
  if (xi.empty()) return 0;
  const double n0 = xi.front().norm();
  double m = 0;
  for (const auto& v : xi) m = std::max(m, std::abs(v.norm() - n0));
  return m;
}

std::vector<double> uniform_grid(double a, double b, int intervals) {
  if (intervals < 1) throw ValidationError("grid needs at least one interval");
  std::vector<double> g(static_cast<size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) g[static_cast<size_t>(i)] = a + (b - a) * i / intervals;
  g.back() = b;
  return g;
}

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw ValidationError("grid needs at least two nodes");
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ValidationError("grid must increase strictly");
}

void check_uniform(const std::vector<double>& grid) {
  check_grid(grid);
  const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  for (size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - grid[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw ValidationError("quadrature grid must be uniform");
}

double record_leakage(const TrajectoryOptions& opt, const VectorXcd& v) {
  if (!opt.module) return 0.0;
  const double l = top_level_mass(*opt.module, v);
  if (l > opt.leakage_limit) throw TruncationOverflow(l, opt.leakage_limit);
  return l;
}

}  // namespace

Trajectory solve_homogeneous(const OperatorPath& path, const VectorXcd& xi0, const std::vector<double>& grid,
                             const TrajectoryOptions& opt) {
  check_grid(grid);
  if (opt.substeps < 1) throw ValidationError("substeps must be >= 1");
  Trajectory tr;
  tr.t = grid;
  tr.xi.reserve(grid.size());
  tr.xi.push_back(xi0);
  tr.leakage.push_back(record_leakage(opt, xi0));
  for (size_t i = 1; i < grid.size(); ++i) {
    tr.xi.push_back(propagate_interval(path, grid[i - 1], grid[i], opt.substeps, tr.xi.back()));
    tr.leakage.push_back(record_leakage(opt, tr.xi.back()));
  }
  return tr;
}

Trajectory solve_homogeneous(const GradedModule& m, const GeneratorPath& path, const VectorXcd& xi0,
                             const std::vector<double>& grid, TrajectoryOptions opt) {
  if (!opt.module) opt.module = &m;
  return solve_homogeneous(OperatorPath::from(m, path), xi0, grid, opt);
}

std::vector<VectorXcd> cumulative_simpson(const std::vector<VectorXcd>& f, double h) {
  const size_t n = f.size();
  std::vector<VectorXcd> out(n);
  if (n == 0) return out;
  out[0] = VectorXcd::Zero(f[0].size());
  if (n == 1) return out;
  if (n == 2) {
    out[1] = 0.5 * h * (f[0] + f[1]);
    return out;
  }
  // Running Simpson sums over [t_0, t_{2k}].
  std::vector<VectorXcd> even(n);
  even[0] = out[0];
  for (size_t i = 2; i < n; i += 2) even[i] = even[i - 2] + (h / 3.0) * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
  // First interval: four-point rule (exact on cubics) when available.
  if (n >= 4)
    out[1] = (h / 24.0) * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
  else
    out[1] = (h / 12.0) * (5.0 * f[0] + 8.0 * f[1] - f[2]);
  for (size_t i = 2; i < n; ++i) {
    if (i % 2 == 0) {
      out[i] = even[i];
    } else {
      // Simpson up to t_{i-3}, then the 3/8 rule on the last three intervals.
      out[i] = even[i - 3] + (3.0 * h / 8.0) * (f[i - 3] + 3.0 * f[i - 2] + 3.0 * f[i - 1] + f[i]);
    }
  }
  return out;
}

Trajectory solve_inhomogeneous(const OperatorPath& path, const std::vector<VectorXcd>& eta,
                               const std::vector<double>& grid, const TrajectoryOptions& opt) {
  check_uniform(grid);
  if (eta.size() != grid.size()) throw ValidationError("solve_inhomogeneous: eta must be sampled on the grid");
  const Eigen::Index dim = eta.front().size();
  // U_i = propagator over [t_0, t_i]; integrand U_i^{-1} eta_i.
  std::vector<MatrixXcd> u(grid.size());
  u[0] = MatrixXcd::Identity(dim, dim);
  for (size_t i = 1; i < grid.size(); ++i) {
    const double h = (grid[i] - grid[i - 1]) / opt.substeps;
    MatrixXcd step = MatrixXcd::Identity(dim, dim);
    for (int s = 0; s < opt.substeps; ++s) {
      const double a = grid[i - 1] + s * h;
      step = (expm(step_generator(path, a, a + h, path.constant ? SampleRule::Left : SampleRule::Magnus4)) * step).eval();
    }
    u[i] = step * u[i - 1];
  }
  std::vector<VectorXcd> w(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) w[i] = u[i].partialPivLu().solve(eta[i]);
  const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  std::vector<VectorXcd> cw = cumulative_simpson(w, h);
  Trajectory tr;
  tr.t = grid;
  for (size_t i = 0; i < grid.size(); ++i) {
    tr.xi.push_back(u[i] * cw[i]);
    tr.leakage.push_back(record_leakage(opt, tr.xi.back()));
  }
  return tr;
}

Trajectory solve_inhomogeneous(const OperatorPath& path, const std::function<VectorXcd(double)>& eta,
                               const std::vector<double>& grid, const TrajectoryOptions& opt) {
  std::vector<VectorXcd> samples;
  samples.reserve(grid.size());
  for (double t : grid) samples.push_back(eta(t));
  return solve_inhomogeneous(path, samples, grid, opt);
}

Trajectory solve_inhomogeneous(const GradedModule& m, const GeneratorPath& path,
                               const std::function<VectorXcd(double)>& eta, const std::vector<double>& grid,
                               TrajectoryOptions opt) {
  if (!opt.module) opt.module = &m;
  return solve_inhomogeneous(OperatorPath::from(m, path), eta, grid, opt);
}

Trajectory gateaux_derivative(const GradedModule& m, const GeneratorPath& path, const VectorXcd& xi0,
                              const GeneratorPath& delta, const std::vector<double>& grid, TrajectoryOptions opt) {
  if (!opt.module) opt.module = &m;
  const OperatorPath op = OperatorPath::from(m, path);
  const Trajectory base = solve_homogeneous(op, xi0, grid, opt);
  std::vector<VectorXcd> eta;
  eta.reserve(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) eta.push_back(assemble_pi(m, delta.at(grid[i])) * base.xi[i]);
  return solve_inhomogeneous(op, eta, grid, opt);
}

VectorXcd dyson_expansion(const GradedModule& m, const GeneratorPath& path, const VectorXcd& xi0, int order,
                          double h, int intervals) {
  if (order < 0) throw ValidationError("dyson_expansion: order must be >= 0");
  const std::vector<double> grid = uniform_grid(path.a, path.b, intervals);
  const double dt = (path.b - path.a) / intervals;
  std::vector<VectorXcd> v(grid.size(), xi0);
  VectorXcd sum = xi0;
  double hp = 1.0;
  for (int j = 1; j <= order; ++j) {
    std::vector<VectorXcd> f(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) f[i] = assemble_pi(m, path.at(grid[i])) * v[i];
    v = cumulative_simpson(f, dt);
    hp *= h;
    sum += hp * v.back();
  }
  return sum;
}

double equation_residual(const OperatorPath& path, const Trajectory& tr, const std::vector<VectorXcd>& eta) {
  const size_t n = tr.t.size();
  if (n < 3) return 0.0;
  // Fourth-order central differences on uniform grids with room for them.
  bool uniform = n >= 5;
  const double h = tr.t[1] - tr.t[0];
  for (size_t i = 1; uniform && i < n; ++i) uniform = std::abs(tr.t[i] - tr.t[i - 1] - h) <= 1e-12 * std::abs(h);
  const size_t lo = uniform ? 2 : 1;
  double worst = 0, scale = 0;
  for (size_t i = lo; i + lo < n; ++i) {
    const VectorXcd d = uniform ? VectorXcd((tr.xi[i - 2] - 8.0 * tr.xi[i - 1] + 8.0 * tr.xi[i + 1] - tr.xi[i + 2]) / (12.0 * h))
                                : VectorXcd((tr.xi[i + 1] - tr.xi[i - 1]) / (tr.t[i + 1] - tr.t[i - 1]));
    VectorXcd rhs = path.at(tr.t[i]) * tr.xi[i];
    if (!eta.empty()) rhs += eta[i];
    worst = std::max(worst, (d - rhs).norm());
    scale = std::max(scale, rhs.norm());
  }
  return scale > 0 ? worst / scale : worst;
}

std::string trajectory_to_csv(const Trajectory& tr, const GradedModule* m) {
  std::ostringstream os;
  os.precision(17);
  os << "t,norm";
  if (m)
    for (int k = 0; k <= m->N(); ++k) os << ",level" << k;
  os << ",leakage\n";
  for (size_t i = 0; i < tr.t.size(); ++i) {
    os << tr.t[i] << "," << tr.xi[i].norm();
    if (m)
      for (int k = 0; k <= m->N(); ++k)
        os << "," << tr.xi[i].segment(m->offsets[static_cast<size_t>(k)], m->dims[static_cast<size_t>(k)]).norm();
    os << "," << (i < tr.leakage.size() ? tr.leakage[i] : 0.0) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Identities

GeneratorPath reparametrize(const GeneratorPath& path, const Reparametrization& r) {
  GeneratorPath p = path;
  p.a = r.a;
  p.b = r.b;
  p.constant = false;
  p.derivative = nullptr;
  auto f = path.at;
  auto phi = r.phi;
  auto dphi = r.dphi;
  p.at = [f, phi, dphi](double s) { return cplx(dphi(s)) * f(phi(s)); };
  return p;
}

double change_of_variable_check(const GradedModule& m, const GeneratorPath& path, const Reparametrization& r,
                                const ProductIntegralOptions& opt) {
  GeneratorPath direct = path;
  direct.a = r.phi(r.a);
  direct.b = r.phi(r.b);
  const Propagator u1 = product_integral(m, direct, opt);
  const Propagator u2 = product_integral(m, reparametrize(path, r), opt);
  return opnorm(u1.U - u2.U);
}

double semigroup_residual(const GradedModule& m, const GeneratorPath& path, double mid,
                          const ProductIntegralOptions& opt) {
  const Propagator lower = product_integral(m, path.restricted(path.a, mid), opt);
  const Propagator upper = product_integral(m, path.restricted(mid, path.b), opt);
  const Propagator whole = product_integral(m, path, opt);
  return opnorm(upper.U * lower.U - whole.U);
}

double inversion_residual(const GradedModule& m, const GeneratorPath& path, const ProductIntegralOptions& opt) {
  const Propagator u = product_integral(m, path, opt);
  const Propagator v = product_integral(m, path.inverse(), opt);
  return opnorm(MatrixXcd(u.U.partialPivLu().inverse()) - v.U);
}

}  // namespace lieexp
