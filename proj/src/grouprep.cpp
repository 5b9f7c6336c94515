#include "lieexp/grouprep.hpp"

#include <cmath>
#include <numbers>

#include "lieexp/linalg.hpp"

namespace lieexp {

namespace {

constexpr double kPi = std::numbers::pi;

CentralElement minus(const CentralElement& a, const CentralElement& b) { return a + (cplx(-1.0) * b); }

double element_size(const CentralElement& x, bool with_central) {
  double s = seminorm(x, 0.0);
  if (with_central) s += std::abs(x.central) + std::abs(x.central_vir);
  return s;
}

// Solves psi + u(t, psi) = theta for the increasing map psi -> phi(t, psi).
double invert_phi(const DiffeoFamily& f, double t, double theta) {
  auto g = [&](double p) { return p + f.u(t, p) - theta; };
  double lo = theta - 1.0, hi = theta + 1.0;
  for (int k = 0; k < 64 && g(lo) > 0; ++k) lo -= std::ldexp(1.0, k);
  for (int k = 0; k < 64 && g(hi) < 0; ++k) hi += std::ldexp(1.0, k);
  double p = theta - f.u(t, theta);
  if (!(p > lo && p < hi)) p = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double v = g(p);
    if (std::abs(v) < 1e-15) break;
    if (v > 0)
      hi = p;
    else
      lo = p;
    if (hi - lo < 1e-13) break;
    const double d = 1.0 + f.u_theta(t, p);
    double next = p - v / d;
    if (!(d > 0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    p = next;
  }
  return p;
}

VectField fit_field(const DiffeoFamily& f, double t, const LogDerivativeOptions& opt) {
  const int m = 1 << opt.log2_points;
  const int deg = std::min(opt.max_degree, m / 2 - 1);
  std::vector<double> x(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double theta = 2.0 * kPi * j / m;
    if (1.0 + f.u_theta(t, theta) <= 0)
      throw NonMonotone("log_derivative: theta -> phi(t, theta) is not increasing at t = " + std::to_string(t));
    const double psi = invert_phi(f, t, theta);
    if (1.0 + f.u_theta(t, psi) <= 0)
      throw NonMonotone("log_derivative: theta -> phi(t, theta) is not increasing at t = " + std::to_string(t));
    x[static_cast<size_t>(j)] = f.u_t(t, psi);
  }
  VectField out;
  for (int n = -deg; n <= deg; ++n) {
    cplx acc = 0;
    for (int j = 0; j < m; ++j) acc += x[static_cast<size_t>(j)] * std::polar(1.0, -2.0 * kPi * n * j / m);
    acc /= static_cast<double>(m);
    if (std::abs(acc) > opt.prune) out.coeffs[n] = acc;
  }
  return out;
}

}  // namespace

DiffeoFamily rigid_rotation(double turns) {
  DiffeoFamily f;
  const double w = 2.0 * kPi * turns;
  f.u = [w](double t, double) { return w * t; };
  f.u_theta = [](double, double) { return 0.0; };
  f.u_t = [w](double, double) { return w; };
  return f;
}

DiffeoFamily sine_family(double eps) {
  DiffeoFamily f;
  f.u = [eps](double t, double th) { return t * eps * std::sin(th); };
  f.u_theta = [eps](double t, double th) { return t * eps * std::cos(th); };
  f.u_t = [eps](double, double th) { return eps * std::sin(th); };
  return f;
}

DiffeoFamily right_translate(const DiffeoFamily& f, std::function<double(double)> v,
                             std::function<double(double)> v_theta) {
  DiffeoFamily g;
  g.a = f.a;
  g.b = f.b;
  g.u = [f, v](double t, double th) { return v(th) + f.u(t, th + v(th)); };
  g.u_theta = [f, v, v_theta](double t, double th) {
    return v_theta(th) + f.u_theta(t, th + v(th)) * (1.0 + v_theta(th));
  };
  g.u_t = [f, v](double t, double th) { return f.u_t(t, th + v(th)); };
  return g;
}

GeneratorPath log_derivative(const DiffeoFamily& family, const LogDerivativeOptions& opt) {
  if (opt.log2_points < 2) throw ValidationError("log_derivative: need at least 4 grid points");
  GeneratorPath p;
  p.a = family.a;
  p.b = family.b;
  p.degree = std::min(opt.max_degree, (1 << opt.log2_points) / 2 - 1);
  // Fail at construction rather than inside a later product integral.
  const int m = 1 << opt.log2_points;
  constexpr int kTimeSamples = 64;
  for (int k = 0; k <= kTimeSamples; ++k) {
    const double t = family.a + (family.b - family.a) * k / kTimeSamples;
    for (int j = 0; j < m; ++j)
      if (1.0 + family.u_theta(t, 2.0 * kPi * j / m) <= 0)
        throw NonMonotone("log_derivative: theta -> phi(t, theta) is not increasing at t = " + std::to_string(t));
  }
  p.at = [family, opt](double t) { return CentralElement::of(fit_field(family, t, opt)); };
  return p;
}

Propagator exponentiate_path(const GradedModule& m, const GeneratorPath& path, const ProductIntegralOptions& opt) {
  return product_integral(m, path, opt);
}

std::vector<PropertyRow> verify_up_properties(const GradedModule& m, const GeneratorPath& path,
                                              const CentralElement& lift, const ProductIntegralOptions& opt) {
  std::vector<PropertyRow> rows;
  {
    const Propagator u = product_integral(m, GeneratorPath::constant_path(lift), opt);
    rows.push_back({"lifting", opnorm(u.U - expm(assemble_pi(m, lift)))});
  }
  {
    const double a = path.a, len = path.b - path.a;
    Reparametrization r;
    r.a = path.a;
    r.b = path.b;
    r.phi = [a, len](double s) {
      const double x = (s - a) / len;
      return a + len * x * x;
    };
    r.dphi = [a, len](double s) { return 2.0 * (s - a) / len; };
    rows.push_back({"reparametrisation", change_of_variable_check(m, path, r, opt)});
  }
  rows.push_back({"factorisation", semigroup_residual(m, path, 0.5 * (path.a + path.b), opt)});
  {
    const Propagator u = product_integral(m, path, opt);
    const Propagator v = product_integral(m, path.inverse(), opt);
    rows.push_back({"inversion", opnorm(MatrixXcd(u.U.adjoint()) - v.U)});
  }
  return rows;
}

double translation_residual(const DiffeoFamily& f, std::function<double(double)> v,
                            std::function<double(double)> v_theta, const LogDerivativeOptions& opt) {
  const GeneratorPath p = log_derivative(f, opt);
  const GeneratorPath q = log_derivative(right_translate(f, std::move(v), std::move(v_theta)), opt);
  double worst = 0;
  for (int k = 0; k <= 4; ++k) {
    const double t = f.a + (f.b - f.a) * k / 4.0;
    worst = std::max(worst, seminorm(minus(q.at(t), p.at(t)), 0.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Homotopies

FlatHomotopy sl2_flow_homotopy(int m, double a1, double b1, double kappa) {
  if (m < 1) throw ValidationError("sl2_flow_homotopy: m must be >= 1");
  const VectField q1 = VectField::mode(m) + VectField::mode(-m);
  const VectField q2 = VectField::mode(m, I_UNIT) + VectField::mode(-m, -I_UNIT);
  const VectField e0 = VectField::mode(0);
  const double w = 2.0 * m;
  // R(alpha) = Ad(exp(alpha Q1)) Q2 and its alpha-derivative [Q1, R].
  auto r = [=](double al) { return cplx(std::cosh(w * al)) * q2 + cplx(2.0 * std::sinh(w * al)) * e0; };
  auto dr = [=](double al) { return cplx(w * std::sinh(w * al)) * q2 + cplx(2.0 * w * std::cosh(w * al)) * e0; };
  FlatHomotopy h;
  h.x1 = [=](double x, double y) {
    const double beta1 = b1 + kPi * kappa * y * std::cos(kPi * x);
    return CentralElement::of(cplx(a1) * q1 + cplx(beta1) * r(a1 * x));
  };
  h.x2 = [=](double x, double) { return CentralElement::of(cplx(kappa * std::sin(kPi * x)) * r(a1 * x)); };
  h.d2x1 = [=](double x, double) { return CentralElement::of(cplx(kPi * kappa * std::cos(kPi * x)) * r(a1 * x)); };
  h.d1x2 = [=](double x, double) {
    return CentralElement::of(cplx(kPi * kappa * std::cos(kPi * x)) * r(a1 * x) +
                              cplx(kappa * std::sin(kPi * x) * a1) * dr(a1 * x));
  };
  return h;
}

FlatHomotopy extend_homotopy(const GradedModule& m, const FlatHomotopy& h, int quad_intervals) {
  if (quad_intervals < 2 || quad_intervals % 2) throw ValidationError("extend_homotopy: intervals must be even");
  const GradedModule* mp = &m;
  auto b = [h, mp](double x, double y) { return representation_cocycle(*mp, h.x1(x, y), h.x2(x, y)).real(); };
  auto central_of = [h, mp](double x, double y, double value) {
    // pi(central z) = z * (c or l) * Id; we need i * value * Id.
    CentralElement z = h.x2(x, y);
    const double unit = z.kind == AlgebraKind::Loop ? mp->ell_value : mp->c_value;
    return I_UNIT * value / unit;
  };
  FlatHomotopy e = h;
  e.x2 = [h, b, central_of, quad_intervals](double x, double y) {
    double acc = 0;
    if (x != 0) {
      const double d = x / quad_intervals;
      for (int k = 0; k <= quad_intervals; ++k) {
        const double w = (k == 0 || k == quad_intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += w * b(k * d, y);
      }
      acc *= d / 3.0;
    }
    CentralElement out = h.x2(x, y);
    out.central += central_of(x, y, acc);
    return out;
  };
  e.d1x2 = [h, b, central_of](double x, double y) {
    constexpr double eps = 1e-5;
    CentralElement out = h.d1x2 ? h.d1x2(x, y) : cplx(0.5 / eps) * minus(h.x2(x + eps, y), h.x2(x - eps, y));
    out.central += central_of(x, y, b(x, y));
    return out;
  };
  return e;
}

double curvature_residual(const FlatHomotopy& h, double x, double y, bool extended) {
  constexpr double e = 1e-5;
  const CentralElement d1 = h.d1x2 ? h.d1x2(x, y)
                                   : cplx(0.5 / e) * minus(h.x2(x + e, y), h.x2(x - e, y));
  const CentralElement d2 = h.d2x1 ? h.d2x1(x, y)
                                   : cplx(0.5 / e) * minus(h.x1(x, y + e), h.x1(x, y - e));
  const CentralElement res = minus(minus(d1, d2), central_bracket(h.x1(x, y), h.x2(x, y)));
  return element_size(res, extended);
}

FlatSection flat_section(const GradedModule& m, const FlatHomotopy& h, const VectorXcd& xi0, int nx, int ny,
                         double max_curvature, int substeps) {
  FlatSection s;
  s.x = uniform_grid(0.0, 1.0, nx);
  s.y = uniform_grid(0.0, 1.0, ny);
  for (double x : s.x)
    for (double y : s.y) s.curvature = std::max(s.curvature, curvature_residual(h, x, y, true));
  if (s.curvature > max_curvature)
    throw CurvatureTooLarge("flat_section: curvature residual " + std::to_string(s.curvature) + " exceeds " +
                            std::to_string(max_curvature));
  TrajectoryOptions topt;
  topt.substeps = substeps;
  topt.module = &m;
  GeneratorPath bottom;
  bottom.at = [h](double u) { return h.x1(u, 0.0); };
  const Trajectory base = solve_homogeneous(m, bottom, xi0, s.x, topt);
  s.F.resize(s.x.size());
  for (size_t i = 0; i < s.x.size(); ++i) {
    GeneratorPath vert;
    const double xi = s.x[i];
    vert.at = [h, xi](double v) { return h.x2(xi, v); };
    s.F[i] = solve_homogeneous(m, vert, base.xi[i], s.y, topt).xi;
  }
  double wx = 0, wy = 0, scale = 0;
  for (size_t i = 0; i < s.x.size(); ++i)
    for (size_t j = 0; j < s.y.size(); ++j) {
      const VectorXcd& f = s.F[i][j];
      if (i > 0 && i + 1 < s.x.size()) {
        const VectorXcd rhs = assemble_pi(m, h.x1(s.x[i], s.y[j])) * f;
        const VectorXcd d = (s.F[i + 1][j] - s.F[i - 1][j]) / (s.x[i + 1] - s.x[i - 1]);
        wx = std::max(wx, (d - rhs).norm());
        scale = std::max(scale, rhs.norm());
      }
      if (j > 0 && j + 1 < s.y.size()) {
        const VectorXcd rhs = assemble_pi(m, h.x2(s.x[i], s.y[j])) * f;
        const VectorXcd d = (s.F[i][j + 1] - s.F[i][j - 1]) / (s.y[j + 1] - s.y[j - 1]);
        wy = std::max(wy, (d - rhs).norm());
        scale = std::max(scale, rhs.norm());
      }
    }
  if (scale == 0) scale = 1;
  s.residual_x = wx / scale;
  s.residual_y = wy / scale;
  return s;
}

double cocycle_integral(const GradedModule& m, const FlatHomotopy& h, double quad_tol) {
  auto simpson2 = [&](int n) {
    const double d = 1.0 / n;
    auto w = [n](int k) { return (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0); };
    double acc = 0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const double u = i * d, v = j * d;
        acc += w(i) * w(j) * representation_cocycle(m, h.x1(u, v), h.x2(u, v)).real();
      }
    return acc * d * d / 9.0;
  };
  int n = 8;
  double prev = simpson2(n);
  while (n < 1024) {
    n *= 2;
    const double cur = simpson2(n);
    if (std::abs(cur - prev) <= quad_tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

HolonomyResult holonomy_phase(const GradedModule& m, const FlatHomotopy& h, const HolonomyOptions& opt) {
  for (int k = 0; k <= 8; ++k) {
    const double y = k / 8.0;
    const double s = std::max(element_size(h.x2(0.0, y), true), element_size(h.x2(1.0, y), true));
    if (s > opt.boundary_tol)
      throw BoundaryViolation("holonomy_phase: X_2 does not vanish on x in {0, 1} (size " + std::to_string(s) + ")");
  }
  double curv = 0;
  for (int i = 1; i < 5; ++i)
    for (int j = 0; j <= 4; ++j) curv = std::max(curv, curvature_residual(h, i / 5.0, j / 4.0, false));
  if (curv > opt.max_curvature)
    throw CurvatureTooLarge("holonomy_phase: curvature residual " + std::to_string(curv));

  HolonomyResult res;
  res.integral = cocycle_integral(m, h, opt.quad_tol);
  res.predicted = std::polar(1.0, res.integral);

  ProductIntegralOptions po;
  po.tol = opt.tol;
  po.rule = SampleRule::Magnus4;
  po.initial_steps = 4;
  GeneratorPath p0, p1;
  p0.at = [h](double t) { return h.x1(t, 0.0); };
  p1.at = [h](double t) { return h.x1(t, 1.0); };
  const Propagator u0 = product_integral(m, p0, po);
  const Propagator u1 = product_integral(m, p1, po);
  res.steps0 = u0.steps;
  res.steps1 = u1.steps;
  const MatrixXcd w = u1.U * u0.U.partialPivLu().inverse();
  const int d = m.window_dim(std::min(opt.window_level, m.N()));
  res.window_dim = d;
  const MatrixXcd block = w.topLeftCorner(d, d);
  res.measured = block.trace() / static_cast<double>(d);
  res.deviation = opnorm(block - res.measured * MatrixXcd::Identity(d, d));
  res.error = std::abs(res.measured - res.predicted);
  res.sign = res.error <= std::abs(res.measured - std::conj(res.predicted)) ? 1 : -1;
  return res;
}

// ---------------------------------------------------------------------------
// Phase chart

cplx phase_function(const VectorXcd& xi, const MatrixXcd& u) {
  const cplx z = xi.dot(u * xi);
  if (std::abs(z) <= 1e-12) throw OutsideChart("phase_function: |(U xi, xi)| <= 1e-12");
  return z / std::abs(z);
}

cplx local_cocycle(const VectorXcd& xi, const MatrixXcd& ug, const MatrixXcd& uh) {
  const MatrixXcd prod = ug * uh;
  return phase_function(xi, prod) / (phase_function(xi, ug) * phase_function(xi, uh));
}

ExtensionCocycleResult extension_cocycle_check(const GradedModule& m, const VectorXcd& xi, const CentralElement& x,
                                               const CentralElement& y, double step) {
  const MatrixXcd px = assemble_pi(m, x);
  const MatrixXcd py = assemble_pi(m, y);
  auto mixed = [&](bool y_first) {
    double acc = 0;
    for (int si : {1, -1})
      for (int ti : {1, -1}) {
        const MatrixXcd gy = expm((si * step) * py);
        const MatrixXcd gx = expm((ti * step) * px);
        const cplx lc = y_first ? local_cocycle(xi, gy, gx) : local_cocycle(xi, gx, gy);
        acc += si * ti * std::arg(lc);
      }
    return acc / (4.0 * step * step);
  };
  ExtensionCocycleResult r;
  r.step = step;
  r.finite_difference = mixed(true) - mixed(false);
  r.cocycle_part = representation_cocycle(m, y, x).real();
  CentralElement yx = central_bracket(y, x);
  yx.central = 0;
  yx.central_vir = 0;
  r.coboundary_part = (-I_UNIT * xi.dot(assemble_pi(m, yx) * xi)).real();
  r.expected = r.cocycle_part + r.coboundary_part;
  r.error = std::abs(r.finite_difference - r.expected);
  return r;
}

}  // namespace lieexp
