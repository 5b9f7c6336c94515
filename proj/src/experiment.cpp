#include "lieexp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "lieexp/grouprep.hpp"
#include "lieexp/linalg.hpp"
#include "lieexp/nelson.hpp"
#include "lieexp/prodint.hpp"
#include "lieexp/scale.hpp"
#include "lieexp/serialize.hpp"

namespace lieexp {

using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Shared state of one run

class ModuleCache {
 public:
  ModulePtr get(const HighestWeightSpec& s, const std::optional<std::string>& dir) {
    const std::string key = s.canonical();
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = modules_.find(key);
      if (it != modules_.end()) return it->second;
    }
    ModulePtr m = load_or_build(s, dir);
    std::lock_guard<std::mutex> lock(mu_);
    return modules_.emplace(key, m).first->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, ModulePtr> modules_;
};

std::uint64_t id_hash(const std::string& id) { return std::stoull(fnv1a_hex(id), nullptr, 16); }

struct Context {
  const ExperimentDescriptor& d;
  const std::string& id;
  const RunOptions& opt;
  ModuleCache& cache;
  json p;
  Rng rng;
  std::map<std::string, std::string> files;

  Context(const ExperimentDescriptor& d_, const std::string& id_, const RunOptions& o, ModuleCache& c)
      : d(d_), id(id_), opt(o), cache(c), rng(d_.seed ^ id_hash(id_)) {
    p = d.params.contains(id) ? d.params.at(id) : json::object();
  }

  [[nodiscard]] double tol(double fallback) const {
    auto it = d.tolerances.find(id);
    return it == d.tolerances.end() ? fallback : it->second;
  }
  template <class T>
  T get(const char* key, T fallback) const {
    if (!p.contains(key)) return fallback;
    try {
      return p.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError("params." + id + "." + key + ": wrong type");
    }
  }
  [[nodiscard]] ModuleChoice choice() const {
    if (p.contains("module")) return ModuleChoice::from_json(p.at("module"), "params." + id + ".module");
    return d.module;
  }
  ModulePtr module_with(HighestWeightSpec s) { return cache.get(s, opt.cache_dir); }
  ModulePtr module() {
    const ModuleChoice c = choice();
    if (c.kind == "su2") throw ValidationError(id + ": needs a highest-weight module, got su2");
    return module_with(c.spec);
  }
  ModulePtr affine_module() {
    const ModuleChoice c = choice();
    if (c.kind != "affine-sl2") throw ValidationError(id + ": needs an affine-sl2 module, got " + c.kind);
    return module_with(c.spec);
  }
  ModulePtr virasoro_module() {
    const ModuleChoice c = choice();
    if (c.kind != "virasoro") throw ValidationError(id + ": needs a virasoro module, got " + c.kind);
    return module_with(c.spec);
  }
  FinDimRep su2_rep() const {
    const ModuleChoice c = choice();
    if (c.kind != "su2") throw ValidationError(id + ": needs an su2 module, got " + c.kind);
    return FinDimRep::make(c.two_j);
  }
  void add_file(const std::string& suffix, std::string content) { files[d.name + "-" + suffix] = std::move(content); }
};

void finish_le(ReportRow& row, double measured, double bound) {
  row.measured = measured;
  row.expected = bound;
  row.tolerance = bound;
  row.comparison = "le";
  row.verdict = (measured <= bound) ? "pass" : "fail";
}

void finish_near(ReportRow& row, double measured, double expected, double tol) {
  row.measured = measured;
  row.expected = expected;
  row.tolerance = tol;
  row.comparison = "near";
  row.verdict = (std::abs(measured - expected) <= tol) ? "pass" : "fail";
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

VectorXcd vacuum(const GradedModule& m) {
  VectorXcd v = VectorXcd::Zero(m.total);
  v(0) = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Paths

GeneratorPath loop_oscillatory_path(double a, double b, double w) {
  const AlgebraPtr g = FiniteLieAlgebra::sl2();
  const int e = g->index_of("e"), h = g->index_of("h"), f = g->index_of("f");
  // R1 = e(1) - f(-1), R2 = i e(1) + i f(-1), both real; plus a fixed i h(0).
  const LoopElement r1 = LoopElement::basis(g, e, 1) + LoopElement::basis(g, f, -1, cplx(-1.0));
  const LoopElement r2 = LoopElement::basis(g, e, 1, I_UNIT) + LoopElement::basis(g, f, -1, I_UNIT);
  const LoopElement r0 = LoopElement::basis(g, h, 0, cplx(0, 0.5));
  GeneratorPath p;
  p.a = a;
  p.b = b;
  p.degree = 1;
  p.at = [=](double t) {
    return CentralElement::of(cplx(std::cos(w * t)) * r1 + cplx(std::sin(w * t)) * r2 + r0);
  };
  return p;
}

CentralElement default_element(const GradedModule* m) {
  if (m && m->is_affine()) {
    const AlgebraPtr g = FiniteLieAlgebra::sl2();
    return CentralElement::of(LoopElement::basis(g, g->index_of("h"), 0, I_UNIT));
  }
  return CentralElement::of(VectField::mode(1, I_UNIT) + VectField::mode(-1, -I_UNIT));
}

GeneratorPath make_path(const PathChoice& pc, const GradedModule* m) {
  const json& q = pc.params;
  const double a = q.value("a", 0.0), b = q.value("b", 1.0);
  GeneratorPath p;
  if (pc.family == "oscillatory") {
    p = oscillatory_path(a, b);
    const double amp = q.value("amplitude", 1.0);
    if (amp != 1.0) p = p.scaled(amp);
  } else if (pc.family == "constant") {
    const CentralElement x = q.contains("element")
                                 ? element_from_json(q.at("element"))
                                 : CentralElement::of(VectField::mode(1) + VectField::mode(-1));
    if (!x.is_real()) throw ValidationError("path.params.element: element is not real");
    p = GeneratorPath::constant_path(x, a, b);
  } else if (pc.family == "rotation") {
    p = log_derivative(rigid_rotation(q.value("turns", 1.0)));
  } else if (pc.family == "sine-diffeo") {
    const double eps = q.value("eps", 0.3);
    if (std::abs(eps) >= 1.0) throw ValidationError("path.params.eps: need |eps| < 1");
    p = log_derivative(sine_family(eps));
  } else if (pc.family == "loop-oscillatory") {
    if (m && !m->is_affine()) throw ValidationError("path.family: loop-oscillatory needs an affine-sl2 module");
    p = loop_oscillatory_path(a, b, q.value("omega", 1.0));
    const double amp = q.value("amplitude", 1.0);
    if (amp != 1.0) p = p.scaled(amp);
  } else {
    throw ValidationError("path.family: unknown family \"" + pc.family + "\"");
  }
  return p;
}

GeneratorPath context_path(Context& c, const GradedModule& m) { return make_path(c.d.path, &m); }

ProductIntegralOptions pi_options(const Context& c, double tol) {
  ProductIntegralOptions o;
  o.tol = c.get("pi_tol", tol);
  o.rule = sample_rule_from_string(c.get<std::string>("rule", "magnus4"));
  return o;
}

// ---------------------------------------------------------------------------
// Checks: module relations

void check_virasoro_commutation(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const int mm = c.get("max_mode", 3);
  row.params = {{"N", m->N()}, {"max_mode", mm}};
  finish_le(row, virasoro_relation_residual(*m, mm), c.tol(1e-9));
}

void check_affine_commutation(Context& c, ReportRow& row) {
  const ModulePtr m = c.affine_module();
  const int mm = c.get("max_mode", 3);
  row.params = {{"N", m->N()}, {"max_mode", mm}};
  finish_le(row, current_relation_residual(*m, mm), c.tol(1e-9));
}

void check_sugawara_current(Context& c, ReportRow& row) {
  const ModulePtr m = c.affine_module();
  const int mm = c.get("max_mode", 3);
  row.params = {{"N", m->N()}, {"max_mode", mm}};
  finish_le(row, sugawara_current_residual(*m, mm), c.tol(1e-8));
}

void check_sugawara_charge(Context& c, ReportRow& row) {
  const ModulePtr m = c.affine_module();
  const double ell = m->spec.ell;
  // dim(sl2) l / (l + h_dual) with h_dual = 2.
  const double expected = 3.0 * ell / (ell + 2.0);
  row.params = {{"N", m->N()}, {"ell", m->spec.ell}};
  finish_near(row, extracted_central_charge(*m), expected, c.tol(1e-8));
}

void check_sugawara_lowest(Context& c, ReportRow& row) {
  const ModulePtr m = c.affine_module();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m->L(0), Eigen::EigenvaluesOnly);
  const double lam = m->spec.lambda, ell = m->spec.ell;
  const double expected = lam * (lam + 2.0) / (4.0 * (ell + 2.0));
  row.params = {{"N", m->N()}, {"ell", m->spec.ell}, {"lambda", m->spec.lambda}};
  finish_near(row, es.eigenvalues().minCoeff(), expected, c.tol(1e-10));
}

void check_shapovalov(Context& c, ReportRow& row) {
  const ModuleChoice ch = c.choice();
  if (ch.kind != "virasoro") throw ValidationError(c.id + ": needs a virasoro module, got " + ch.kind);
  if (!ch.spec.c.is_exact() || !ch.spec.h.is_exact())
    throw ValidationError(c.id + ": needs exact c and h");
  HighestWeightSpec s = ch.spec;
  s.N = std::max(s.N, 2);
  const Verma v = build_verma(s);
  const Rational& cc = s.c.exact();
  const Rational& h = s.h.exact();
  int mismatches = 0;
  const auto g1 = gram_matrix_exact(v, 1);
  if (g1.size() != 1 || g1[0][0] != 2 * h) ++mismatches;
  const auto g2 = gram_matrix_exact(v, 2);
  const auto& b2 = v.basis[2];
  for (size_t i = 0; i < b2.size(); ++i)
    for (size_t j = 0; j < b2.size(); ++j) {
      const bool li = b2[i].factors.size() == 1, lj = b2[j].factors.size() == 1;
      Rational want;
      if (li && lj)
        want = 4 * h + cc / 2;
      else if (!li && !lj)
        want = 4 * h * (2 * h + 1);
      else
        want = 6 * h;
      want.canonicalize();
      if (g2[i][j] != want) ++mismatches;
    }
  row.params = {{"c", s.c.to_string()}, {"h", s.h.to_string()}, {"level1", Rational(2 * h).get_str()},
                {"level2_diagonal", Rational(4 * h + cc / 2).get_str()}};
  finish_le(row, mismatches, 0.0);
}

// (c, h) from [c, h] or {"m", "p", "q"}.
std::pair<Number, Number> weight_point(const json& j, const std::string& where) {
  if (j.is_array() && j.size() == 2) {
    auto num = [&](const json& x) {
      if (x.is_string()) return Number::parse(x.get<std::string>());
      if (x.is_number()) return x.is_number_integer() ? Number(x.get<int>()) : Number(x.get<double>());
      throw ValidationError(where + ": expected a number or string");
    };
    return {num(j[0]), num(j[1])};
  }
  if (j.is_object() && j.contains("m") && j.contains("p") && j.contains("q")) {
    const int m = j["m"].get<int>(), p = j["p"].get<int>(), q = j["q"].get<int>();
    return {Number(discrete_c(m)), Number(discrete_h(m, p, q))};
  }
  throw ValidationError(where + ": expected [c, h] or {m, p, q}");
}

// True when some Gram matrix through `levels` has a negative direction.
bool has_negative_direction(const HighestWeightSpec& s) {
  const Verma v = build_verma(s);
  for (int k = 1; k <= s.N; ++k) {
    if (s.c.is_exact() && s.h.is_exact()) {
      bool neg = false;
      exact_psd_rank(gram_matrix_exact(v, k), &neg);
      if (neg) return true;
    } else {
      const MatrixXd g = gram_matrix(v, k);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(g, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, g.norm())) return true;
    }
  }
  return false;
}

void check_unitarity_region(Context& c, ReportRow& row) {
  const int levels = c.get("levels", 8);
  const json unitary = c.p.value("unitary", json::array({json{{"m", 1}, {"p", 2}, {"q", 2}},
                                                          json{{"m", 1}, {"p", 2}, {"q", 1}},
                                                          json::array({1, 0}), json::array({1, 1})}));
  const json non_unitary = c.p.value("non_unitary", json::array({json::array({"1/2", "3/10"})}));
  int wrong = 0;
  json detail = json::array();
  auto run = [&](const json& list, bool expect_unitary, const char* field) {
    for (size_t i = 0; i < list.size(); ++i) {
      const auto [cc, hh] = weight_point(list[i], "params." + c.id + "." + field);
      const HighestWeightSpec s = HighestWeightSpec::virasoro(cc, hh, levels);
      const bool negative = has_negative_direction(s);
      bool raised = false;
      if (!expect_unitary) {
        try {
          (void)build_module(s);
        } catch (const NotUnitarizable&) {
          raised = true;
        }
      }
      const bool ok = expect_unitary ? !negative : (negative && raised);
      if (!ok) ++wrong;
      detail.push_back({{"c", cc.to_string()}, {"h", hh.to_string()}, {"expect_unitary", expect_unitary},
                        {"negative_direction", negative}, {"ok", ok}});
    }
  };
  run(unitary, true, "unitary");
  run(non_unitary, false, "non_unitary");
  row.params = {{"levels", levels}, {"points", detail}};
  finish_le(row, wrong, 0.0);
}

// ---------------------------------------------------------------------------
// Checks: group paths

void check_rotation_phase(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const double turns = c.get("turns", c.d.path.family == "rotation" ? c.d.path.params.value("turns", 1.0) : 1.0);
  const Propagator u = exponentiate_path(*m, log_derivative(rigid_rotation(turns)), pi_options(c, 1e-10));
  const auto n = static_cast<double>(u.U.rows());
  const cplx scalar = u.U.trace() / n;
  const double deviation = opnorm(u.U - scalar * MatrixXcd::Identity(u.U.rows(), u.U.cols()));
  const double h0 = m->l0_diagonal()(0);
  const cplx predicted = std::polar(1.0, 2.0 * kPi * turns * h0);
  row.params = {{"N", m->N()}, {"turns", turns}, {"lowest_l0", h0}, {"scalar", cplx_json(scalar)},
                {"predicted", cplx_json(predicted)}, {"deviation", deviation}, {"steps", u.steps}};
  finish_le(row, std::max(std::abs(scalar - predicted), deviation), c.tol(1e-8));
}

void check_log_derivative(Context& c, ReportRow& row) {
  const double turns = c.get("turns", 1.0), eps = c.get("eps", 0.3);
  LogDerivativeOptions lo;
  lo.log2_points = c.get("log2_points", 7);
  lo.max_degree = c.get("max_degree", 24);
  const GeneratorPath rot = log_derivative(rigid_rotation(turns), lo);
  double rot_err = 0;
  for (double t : {0.0, 0.3, 1.0}) {
    CentralElement diff = rot.at(t) + CentralElement::of(VectField::mode(0, cplx(-2.0 * kPi * turns)));
    rot_err = std::max(rot_err, seminorm(diff, 0.0));
  }
  // Sine family: X(t)(theta) = eps sin(psi) with psi + t eps sin(psi) = theta.
  const GeneratorPath sine = log_derivative(sine_family(eps), lo);
  double sine_err = 0;
  for (double t : {0.25, 0.5, 1.0}) {
    const VectField f = sine.at(t).vect;
    for (int k = 0; k < 17; ++k) {
      const double theta = 2.0 * kPi * k / 17.0;
      double psi = theta;
      for (int it = 0; it < 400; ++it) psi = theta - t * eps * std::sin(psi);
      cplx val = 0;
      for (const auto& [n, a] : f.coeffs) val += a * std::polar(1.0, n * theta);
      sine_err = std::max(sine_err, std::abs(val - eps * std::sin(psi)));
    }
  }
  row.params = {{"turns", turns}, {"eps", eps}, {"rotation_error", rot_err}, {"sine_error", sine_err}};
  finish_le(row, std::max(rot_err, sine_err), c.tol(1e-8));
}

void check_up_properties(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  const auto rows = verify_up_properties(*m, path, path.at(path.a), pi_options(c, 1e-10));
  double worst = 0;
  json detail = json::object();
  for (const auto& r : rows) {
    detail[r.property] = r.residual;
    worst = std::max(worst, r.residual);
  }
  const double tr = translation_residual(
      sine_family(c.get("eps", 0.3)), [](double th) { return 0.2 * std::sin(th); },
      [](double th) { return 0.2 * std::cos(th); });
  detail["translation"] = tr;
  worst = std::max(worst, tr);
  row.params = {{"N", m->N()}, {"family", c.d.path.family}, {"residuals", detail}};
  finish_le(row, worst, c.tol(1e-7));
}

// ---------------------------------------------------------------------------
// Checks: product integrals

void check_propagator_unitarity(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const Propagator u = product_integral(*m, context_path(c, *m), pi_options(c, 1e-10));
  const double det = std::abs(std::abs(u.U.determinant()) - 1.0);
  row.params = {{"N", m->N()}, {"steps", u.steps}, {"determinant_defect", det}};
  finish_le(row, std::max(unitarity_defect(u.U), det), c.tol(1e-11));
}

MatrixXcd reference_propagator(Context& c, const GradedModule& m, const GeneratorPath& path) {
  ProductIntegralOptions o;
  o.tol = c.get("reference_tol", 1e-11);
  return product_integral(m, path, o).U;
}

void check_step_convergence(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  const MatrixXcd ref = reference_propagator(c, *m, path);
  const auto steps = c.get<std::vector<long>>("steps", {16, 32, 64, 128, 256});
  std::vector<double> x, err;
  for (long n : steps) {
    const Propagator u = step_product(*m, path, StepSubdivision::uniform(path.a, path.b, n, SampleRule::Left));
    x.push_back(static_cast<double>(n));
    err.push_back(opnorm(u.U - ref));
  }
  row.params = {{"N", m->N()}, {"steps", steps}, {"errors", err}};
  finish_near(row, loglog_slope(x, err), -1.0, c.tol(0.1));
}

void check_step_error(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  const long n = c.get("steps", 64L);
  const MatrixXcd ref = reference_propagator(c, *m, path);
  const Propagator u = step_product(*m, path, StepSubdivision::uniform(path.a, path.b, n, SampleRule::Left));
  row.params = {{"N", m->N()}, {"steps", n}};
  finish_le(row, opnorm(u.U - ref), c.tol(1.0));
}

void check_refinement_bound(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  ProductIntegralOptions o;
  o.rule = SampleRule::Left;
  o.record_bound = true;
  o.dense_history = true;
  o.tol = c.get("pi_tol", 1e-2);
  o.r = c.get("r", 0.0);
  const Propagator u = product_integral(*m, path, o);
  double ratio = 0;
  json levels = json::array();
  for (const auto& l : u.history) {
    ratio = std::max(ratio, l.difference / l.bound);
    levels.push_back({{"steps", l.steps}, {"difference", l.difference}, {"bound", l.bound}});
  }
  row.params = {{"N", m->N()}, {"r", o.r}, {"levels", levels}};
  finish_le(row, ratio, 1.0);
  row.tolerance = 1.0;
}

double dyson_error(Context& c, const GradedModule& m, const GeneratorPath& path, int order, double h) {
  const VectorXcd xi = vacuum(m);
  const VectorXcd exact = reference_propagator(c, m, path.scaled(h)) * xi;
  const VectorXcd approx = dyson_expansion(m, path, xi, order, h, c.get("intervals", 512));
  return (approx - exact).norm();
}

void check_dyson_order(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  const auto orders = c.get<std::vector<int>>("orders", {1, 2, 3});
  const auto hs = c.get<std::vector<double>>("h", {0.2, 0.1, 0.05, 0.025});
  double worst = 0;
  json slopes = json::object();
  for (int k : orders) {
    std::vector<double> err;
    for (double h : hs) err.push_back(dyson_error(c, *m, path, k, h));
    const double s = loglog_slope(hs, err);
    slopes[std::to_string(k)] = s;
    worst = std::max(worst, std::isfinite(s) ? std::abs(s - (k + 1)) : std::numeric_limits<double>::infinity());
  }
  row.params = {{"N", m->N()}, {"h", hs}, {"slopes", slopes}};
  finish_le(row, worst, c.tol(0.15));
}

void check_dyson_error(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const int k = c.get("order", 2);
  const double h = c.get("h", 0.1);
  row.params = {{"N", m->N()}, {"order", k}, {"h", h}};
  finish_le(row, dyson_error(c, *m, context_path(c, *m), k, h), c.tol(1.0));
}

// ---------------------------------------------------------------------------
// Checks: trajectories

TrajectoryOptions trajectory_options(const Context& c, const GradedModule& m, double leakage) {
  TrajectoryOptions o;
  o.substeps = c.get("substeps", 4);
  o.leakage_limit = c.get("leakage_limit", leakage);
  o.module = &m;
  return o;
}

std::vector<double> context_grid(const Context& c, const GeneratorPath& path) {
  return uniform_grid(path.a, path.b, c.get("intervals", 64));
}

void check_homogeneous(Context& c, ReportRow& row, bool drift) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  const auto grid = context_grid(c, path);
  const Trajectory tr = solve_homogeneous(*m, path, vacuum(*m), grid, trajectory_options(c, *m, 1e-3));
  row.leakage = tr.max_leakage();
  row.params = {{"N", m->N()}, {"intervals", grid.size() - 1}};
  if (drift) {
    finish_le(row, tr.norm_drift(), c.tol(1e-9));
  } else {
    c.add_file("trajectory.csv", trajectory_to_csv(tr, m.get()));
    finish_le(row, equation_residual(OperatorPath::from(*m, path), tr), c.tol(1e-4));
  }
}

void check_inhomogeneous(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  const auto grid = context_grid(c, path);
  const VectorXcd v0 = vacuum(*m);
  const VectorXcd v1 = random_vector(*m, std::min(2, m->N()), c.rng);
  std::vector<VectorXcd> eta;
  for (double t : grid) eta.push_back(std::cos(t) * v0 + std::sin(3.0 * t) * v1);
  const OperatorPath op = OperatorPath::from(*m, path);
  const Trajectory tr = solve_inhomogeneous(op, eta, grid, trajectory_options(c, *m, 1e-3));
  row.leakage = tr.max_leakage();
  row.params = {{"N", m->N()}, {"intervals", grid.size() - 1}};
  finish_le(row, equation_residual(op, tr, eta), c.tol(1e-4));
}

void check_gateaux(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  const auto grid = context_grid(c, path);
  const CentralElement delta = c.p.contains("delta") ? element_from_json(c.p.at("delta")) : default_element(m.get());
  const double eps = c.get("eps", 1e-4);
  // The derivative weights high levels more than the trajectory itself.
  const TrajectoryOptions o = trajectory_options(c, *m, 1e-1);
  const VectorXcd xi0 = vacuum(*m);
  const Trajectory g = gateaux_derivative(*m, path, xi0, GeneratorPath::constant_path(delta, path.a, path.b), grid, o);
  auto shifted = [&](double s) {
    GeneratorPath q = path;
    q.constant = false;
    q.degree = std::max(path.degree, delta.degree());
    q.at = [path, delta, s](double t) { return path.at(t) + cplx(s) * delta; };
    return solve_homogeneous(*m, q, xi0, grid, o).xi.back();
  };
  const VectorXcd fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
  const double rel = (fd - g.xi.back()).norm() / g.xi.back().norm();
  row.leakage = g.max_leakage();
  row.params = {{"N", m->N()}, {"eps", eps}, {"derivative_norm", g.xi.back().norm()}};
  finish_le(row, rel, c.tol(1e-5));
}

// ---------------------------------------------------------------------------
// Checks: identities

void check_semigroup(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  const double mid = c.get("mid", 0.5 * (path.a + path.b));
  row.params = {{"N", m->N()}, {"mid", mid}};
  finish_le(row, semigroup_residual(*m, path, mid, pi_options(c, 1e-10)), c.tol(1e-8));
}

void check_inversion(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  row.params = {{"N", m->N()}};
  finish_le(row, inversion_residual(*m, context_path(c, *m), pi_options(c, 1e-10)), c.tol(1e-8));
}

void check_change_of_variable(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const GeneratorPath path = context_path(c, *m);
  Reparametrization r;
  r.a = path.a;
  r.b = path.b;
  const double a = path.a, len = path.b - path.a;
  r.phi = [a, len](double s) {
    const double x = (s - a) / len;
    return a + len * x * x;
  };
  r.dphi = [a, len](double s) { return 2.0 * (s - a) / len; };
  row.params = {{"N", m->N()}, {"reparametrisation", "sigma^2"}};
  finish_le(row, change_of_variable_check(*m, path, r, pi_options(c, 1e-10)), c.tol(1e-7));
}

// ---------------------------------------------------------------------------
// Checks: holonomy and flat sections

HolonomyOptions holonomy_options(const Context& c) {
  HolonomyOptions o;
  o.window_level = c.get("window_level", 4);
  o.tol = c.get("pi_tol", 1e-10);
  return o;
}

void check_holonomy(Context& c, ReportRow& row) {
  const ModuleChoice ch = c.choice();
  if (ch.kind != "virasoro") throw ValidationError(c.id + ": needs a virasoro module, got " + ch.kind);
  std::vector<int> ns = c.get<std::vector<int>>("truncations", c.d.truncations);
  if (ns.empty()) ns.push_back(ch.spec.N);
  const FlatHomotopy h = sl2_flow_homotopy(c.get("m", 2), c.get("a1", 0.1), c.get("b1", 0.1), c.get("kappa", 0.1));
  json errors = json::array(), deviations = json::array();
  bool monotone = true;
  double last = std::numeric_limits<double>::infinity();
  HolonomyResult r;
  for (int n : ns) {
    HighestWeightSpec s = ch.spec;
    s.N = n;
    r = holonomy_phase(*c.module_with(s), h, holonomy_options(c));
    errors.push_back(r.error);
    deviations.push_back(r.deviation);
    monotone = monotone && r.error < last;
    last = r.error;
  }
  row.params = {{"N", ns},
                {"integral", r.integral},
                {"predicted", cplx_json(r.predicted)},
                {"measured", cplx_json(r.measured)},
                {"errors", errors},
                {"deviations", deviations},
                {"monotone", monotone},
                {"sign", r.sign}};
  finish_le(row, r.error, c.tol(1e-4));
  if (!monotone || r.sign != 1) {
    row.verdict = "fail";
    row.message = monotone ? "measured phase sits nearer e^{-i integral}" : "error does not decrease with N";
  }
}

void check_mobius_holonomy(Context& c, ReportRow& row) {
  const ModulePtr m = c.virasoro_module();
  const FlatHomotopy h = sl2_flow_homotopy(1, c.get("a1", 0.1), c.get("b1", 0.1), c.get("kappa", 0.1));
  const HolonomyResult r = holonomy_phase(*m, h, holonomy_options(c));
  row.params = {{"N", m->N()}, {"integral", r.integral}, {"measured", cplx_json(r.measured)}, {"deviation", r.deviation}};
  finish_le(row, std::max(std::abs(r.measured - cplx(1.0)), r.deviation), c.tol(1e-6));
}

void check_flat_section(Context& c, ReportRow& row) {
  const ModulePtr m = c.virasoro_module();
  const FlatHomotopy h =
      extend_homotopy(*m, sl2_flow_homotopy(c.get("m", 2), c.get("a1", 0.1), c.get("b1", 0.1), c.get("kappa", 0.1)));
  const int n = c.get("grid", 32);
  const FlatSection f = flat_section(*m, h, vacuum(*m), n, n, c.get("max_curvature", 1e-6));
  row.params = {{"N", m->N()}, {"grid", n}, {"residual_x", f.residual_x}, {"residual_y", f.residual_y},
                {"curvature", f.curvature}};
  finish_le(row, std::max(f.residual_x, f.residual_y), c.tol(5e-3));
}

// ---------------------------------------------------------------------------
// Checks: the projective extension

std::pair<CentralElement, CentralElement> sl2_pair(int mm) {
  const CentralElement q1 = CentralElement::of(VectField::mode(mm) + VectField::mode(-mm));
  const CentralElement q2 = CentralElement::of(VectField::mode(mm, I_UNIT) + VectField::mode(-mm, -I_UNIT));
  return {q1, q2};
}

void check_extension_cocycle(Context& c, ReportRow& row) {
  const ModulePtr m = c.virasoro_module();
  const auto [x, y] = sl2_pair(c.get("m", 2));
  const ExtensionCocycleResult r = extension_cocycle_check(*m, vacuum(*m), x, y, c.get("step", 1e-3));
  row.params = {{"N", m->N()}, {"finite_difference", r.finite_difference}, {"cocycle_part", r.cocycle_part},
                {"coboundary_part", r.coboundary_part}, {"step", r.step}};
  finish_near(row, r.finite_difference, r.expected, c.tol(1e-3));
}

void check_local_cocycle_invariance(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const int samples = c.get("samples", 20);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  double worst = 0;
  int outside = 0;
  for (int k = 0; k < samples; ++k) {
    const VectorXcd xi = random_vector(*m, std::min(2, m->N()), c.rng);
    CentralElement x, y;
    if (m->is_affine()) {
      x = CentralElement::of(random_real_loop(2, 0.3, c.rng));
      y = CentralElement::of(random_real_loop(2, 0.3, c.rng));
    } else {
      x = CentralElement::of(random_real_field(2, 0.3, c.rng));
      y = CentralElement::of(random_real_field(2, 0.3, c.rng));
    }
    const MatrixXcd ug = expm(assemble_pi(*m, x)), uh = expm(assemble_pi(*m, y));
    const cplx a = std::polar(1.0, phase(c.rng)), b = std::polar(1.0, phase(c.rng));
    try {
      const cplx l1 = local_cocycle(xi, ug, uh);
      const cplx l2 = local_cocycle(xi, a * ug, b * uh);
      worst = std::max({worst, std::abs(l1 - l2), std::abs(std::abs(l1) - 1.0)});
    } catch (const OutsideChart&) {
      ++outside;
    }
  }
  row.params = {{"N", m->N()}, {"samples", samples}, {"outside_chart", outside}};
  finish_le(row, worst, c.tol(1e-12));
}

// ---------------------------------------------------------------------------
// Checks: estimates

struct Tally {
  int samples = 0;
  int violations = 0;
  double worst_ratio = 0;
  double leakage = 0;

  void add(const EstimateRow& r) {
    ++samples;
    if (!r.holds) ++violations;
    if (r.rhs > 0) worst_ratio = std::max(worst_ratio, r.lhs / r.rhs);
    leakage = std::max(leakage, r.leakage);
  }
  void finish(ReportRow& row, json params) const {
    params["samples"] = samples;
    params["worst_ratio"] = worst_ratio;
    params["unexplained_violations"] = violations;
    row.params = std::move(params);
    row.leakage = leakage;
    finish_le(row, violations, 0.0);
  }
};

struct SampleSpace {
  int max_degree;
  double t_range;
  double scale;
};

SampleSpace sample_space(const Context& c, double scale) {
  return {c.get("max_degree", 3), c.get("t_range", 1.5), c.get("scale", scale)};
}

CentralElement random_element(const GradedModule& m, int degree, double scale, Rng& rng) {
  if (m.is_affine()) return CentralElement::of(random_real_loop(degree, scale, rng));
  return CentralElement::of(random_real_field(degree, scale, rng));
}

void check_basic(Context& c, ReportRow& row) {
  const ModulePtr m = c.module();
  const SampleSpace sp = sample_space(c, 1.0);
  const Seminorm norm = Seminorm::for_module(*m);
  std::uniform_int_distribution<int> deg(1, sp.max_degree);
  std::uniform_real_distribution<double> tt(-sp.t_range, sp.t_range);
  Tally tally;
  for (int k = 0, n = c.get("samples", 1000); k < n; ++k) {
    const int d = deg(c.rng);
    const CentralElement x = random_element(*m, d, sp.scale, c.rng);
    const double t = tt(c.rng);
    const VectorXcd xi = random_vector(*m, std::max(0, m->N() - d - 1), c.rng);
    for (const auto& r : check_basic_estimates(*m, x, xi, t, norm)) tally.add(r);
  }
  tally.finish(row, {{"N", m->N()}, {"seminorm", norm.name()}});
}

void check_gw_virasoro_estimate(Context& c, ReportRow& row) {
  const ModulePtr m = c.virasoro_module();
  const SampleSpace sp = sample_space(c, 1.0);
  std::uniform_int_distribution<int> deg(1, sp.max_degree);
  std::uniform_real_distribution<double> tt(-sp.t_range, sp.t_range);
  Tally tally;
  for (int k = 0, n = c.get("samples", 1000); k < n; ++k) {
    const int d = deg(c.rng);
    const CentralElement x = CentralElement::of(random_real_field(d, sp.scale, c.rng));
    const double t = tt(c.rng);
    const VectorXcd xi = random_vector(*m, std::max(0, m->N() - d - 1), c.rng);
    tally.add(check_gw_virasoro(*m, x, xi, t));
  }
  tally.finish(row, {{"N", m->N()}, {"M", std::sqrt(m->c_value / 12.0)}});
}

void check_gw_loop_estimate(Context& c, ReportRow& row) {
  const ModulePtr m = c.affine_module();
  const SampleSpace sp = sample_space(c, 1.0);
  std::uniform_int_distribution<int> deg(1, sp.max_degree);
  std::uniform_real_distribution<double> tt(-sp.t_range, sp.t_range);
  Tally loop, field;
  for (int k = 0, n = c.get("samples", 1000); k < n; ++k) {
    const int d = deg(c.rng);
    const LoopElement x = random_real_loop(d, sp.scale, c.rng);
    const VectField f = random_real_field(d, sp.scale, c.rng);
    const double t = tt(c.rng);
    const VectorXcd xi = random_vector(*m, std::max(0, m->N() - d - 1), c.rng);
    const auto rows = check_gw_loop(*m, x, f, xi, t);
    loop.add(rows.at(0));
    field.add(rows.at(1));
  }
  Tally both = loop;
  both.violations += field.violations;
  both.worst_ratio = std::max(loop.worst_ratio, field.worst_ratio);
  both.leakage = std::max(loop.leakage, field.leakage);
  both.finish(row, {{"N", m->N()},
                    {"ell", m->spec.ell},
                    {"loop_violations", loop.violations},
                    {"field_violations", field.violations},
                    {"loop_worst_ratio", loop.worst_ratio},
                    {"field_worst_ratio", field.worst_ratio}});
}

void check_exp_estimate_rows(Context& c, ReportRow& row, bool difference) {
  const ModulePtr m = c.module();
  const SampleSpace sp = sample_space(c, 0.5);
  const Seminorm norm = Seminorm::for_module(*m);
  std::uniform_int_distribution<int> deg(1, sp.max_degree);
  std::uniform_int_distribution<int> nn(0, c.get("max_n", 3));
  Tally tally;
  for (int k = 0, n = c.get("samples", 1000); k < n; ++k) {
    const int d = deg(c.rng);
    const CentralElement x = random_element(*m, d, sp.scale, c.rng);
    const double idx = nn(c.rng);
    if (difference) {
      const CentralElement y = random_element(*m, d, sp.scale, c.rng);
      const VectorXcd xi = random_vector(*m, std::max(0, m->N() - d - 1), c.rng);
      tally.add(check_exp_difference(*m, x, y, xi, idx, norm));
    } else {
      tally.add(check_exp_estimate(*m, x, idx, norm));
    }
  }
  tally.finish(row, {{"N", m->N()}, {"seminorm", norm.name()}});
}

// ---------------------------------------------------------------------------
// Checks: su(2)

NelsonReport nelson_report(Context& c, const FinDimRep& r) {
  NelsonOptions o;
  o.tol = c.get("pi_tol", 1e-12);
  o.omega = c.get("omega", 2.0);
  o.reference_steps = c.get("reference_steps", 4000);
  o.concatenations = c.get("concatenations", 4);
  o.seed = c.rng();
  return exponentiate_vs_oracle(r, o);
}

json spins_json(const FinDimRep& r) { return r.two_j; }

void check_nelson(Context& c, ReportRow& row, const std::string& which) {
  const FinDimRep r = c.su2_rep();
  const NelsonReport rep = nelson_report(c, r);
  row.params = {{"two_j", spins_json(r)}, {"dim", r.dim}};
  if (which == "axis-angle") {
    row.params["rotating_residual"] = rep.rotating_residual;
    finish_le(row, rep.axis_angle_residual, c.tol(1e-12));
  } else if (which == "reference") {
    finish_le(row, std::max(rep.reference_residual, rep.rotating_residual), c.tol(1e-9));
  } else if (which == "path-independence") {
    finish_le(row, rep.path_independence, c.tol(1e-6));
  } else if (which == "homomorphism") {
    row.params["unitarity"] = rep.unitarity;
    row.params["determinant"] = rep.determinant;
    finish_le(row, std::max({rep.homomorphism, rep.unitarity, rep.determinant}), c.tol(1e-8));
  } else {
    finish_le(row, rep.full_turn, c.tol(1e-12));
  }
}

void check_nelson_assumptions(Context& c, ReportRow& row) {
  const FinDimRep r = c.su2_rep();
  const auto rows = verify_assumptions(r, c.get("n_max", 4));
  double comm = 0, pic = 0;
  for (const auto& a : rows) {
    comm = std::max(comm, a.comm_constant);
    pic = std::max(pic, a.pi_constant);
  }
  row.params = {{"two_j", spins_json(r)},
                {"max_pi_constant", pic},
                {"commutation_residual", r.commutation_residual()},
                {"skew_residual", r.skew_residual()}};
  // A is block-scalar, so [A, pi(X)] vanishes; the pi constants must be finite.
  finish_le(row, std::max({comm, r.commutation_residual(), r.skew_residual()}), c.tol(1e-12));
  if (!std::isfinite(pic)) row.verdict = "fail";
}

// ---------------------------------------------------------------------------
// Registry

struct Entry {
  CheckInfo info;
  std::function<void(Context&, ReportRow&)> run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e = {
        {{"affine-commutation", "affine current relations with central term l", "affine-sl2",
          "safe-window residual of [x(a), y(b)]"},
         check_affine_commutation},
        {{"basic-estimates", "estimates of pi(X) and [A, pi(X)] on the Sobolev scale", "virasoro affine-sl2",
          "randomised ||pi(X) xi||_n and commutator estimates"},
         check_basic},
        {{"change-of-variable", "change of variable for product integrals", "virasoro affine-sl2",
          "reparametrisation by sigma^2"},
         check_change_of_variable},
        {{"dyson-error", "Dyson expansion of the product integral", "virasoro affine-sl2",
          "error of the order-k Dyson sum at one scale h"},
         check_dyson_error},
        {{"dyson-order", "Dyson expansion of the product integral", "virasoro affine-sl2",
          "log-log slope k+1 of the order-k Dyson error"},
         check_dyson_order},
        {{"exp-difference", "estimate for the difference of two exponentials", "virasoro affine-sl2",
          "randomised ||e^{pi(X)} xi - e^{pi(Y)} xi||_n"},
         [](Context& c, ReportRow& r) { check_exp_estimate_rows(c, r, true); }},
        {{"exp-estimate", "Sobolev estimate of e^{pi(X)}", "virasoro affine-sl2",
          "randomised ||A^n e^{pi(X)} A^{-n}||"},
         [](Context& c, ReportRow& r) { check_exp_estimate_rows(c, r, false); }},
        {{"extension-cocycle", "Lie algebra cocycle of the projective extension", "virasoro",
          "mixed difference of the local multiplication vs B(Y,X) - i(pi([Y,X])xi, xi)"},
         check_extension_cocycle},
        {{"flat-section", "flat sections over a flat homotopy", "virasoro",
          "residuals of d_x F = pi(X_1)F and d_y F = pi(X_2)F"},
         check_flat_section},
        {{"gateaux-derivative", "differentiability of the solution in X", "virasoro affine-sl2",
          "Gateaux derivative vs central differences"},
         check_gateaux},
        {{"gw-loop-estimate", "Goodman-Wallach estimates for loop algebras", "affine-sl2",
          "loop and field inequalities on random samples"},
         check_gw_loop_estimate},
        {{"gw-virasoro-estimate", "Goodman-Wallach estimate for vector fields", "virasoro",
          "three-term inequality with M = sqrt(c/12) on random samples"},
         check_gw_virasoro_estimate},
        {{"holonomy-phase", "holonomy lemma: homotopic paths differ by e^{i int B}", "virasoro",
          "scalar phase of an e_{+-2} flow loop vs e^{i int B}"},
         check_holonomy},
        {{"homogeneous-residual", "existence theorem for the homogeneous equation", "virasoro affine-sl2",
          "residual of d xi/dt = pi(X(t)) xi"},
         [](Context& c, ReportRow& r) { check_homogeneous(c, r, false); }},
        {{"inhomogeneous-residual", "solution of the inhomogeneous equation", "virasoro affine-sl2",
          "residual of d J/dt = pi(X(t)) J + eta"},
         check_inhomogeneous},
        {{"inversion", "inverse of a product integral", "virasoro affine-sl2",
          "U^{-1} vs the reversed negated path"},
         check_inversion},
        {{"local-cocycle-invariance", "phase chart of the projective unitary group", "virasoro affine-sl2",
          "local multiplication under rescaled lifts"},
         check_local_cocycle_invariance},
        {{"log-derivative", "logarithmic derivative of a diffeomorphism path", "any",
          "spectral fit vs closed forms"},
         check_log_derivative},
        {{"mobius-holonomy", "holonomy lemma on the Moebius subalgebra", "virasoro",
          "phase 1 for homotopies in the e_{0,+-1} span"},
         check_mobius_holonomy},
        {{"nelson-assumptions", "Sobolev assumptions for a finite-dimensional representation", "su2",
          "constants of the pi and commutator estimates"},
         check_nelson_assumptions},
        {{"nelson-axis-angle", "exponentiation of finite-dimensional representations", "su2",
          "product integral vs axis-angle closed form"},
         [](Context& c, ReportRow& r) { check_nelson(c, r, "axis-angle"); }},
        {{"nelson-full-turn", "exponentiation of finite-dimensional representations", "su2",
          "2 pi rotation acts as -Id on half-integer spins"},
         [](Context& c, ReportRow& r) { check_nelson(c, r, "full-turn"); }},
        {{"nelson-homomorphism", "exponentiation of finite-dimensional representations", "su2",
          "concatenation, unitarity and determinant residuals"},
         [](Context& c, ReportRow& r) { check_nelson(c, r, "homomorphism"); }},
        {{"nelson-path-independence", "exponentiation of finite-dimensional representations", "su2",
          "different paths to the same SU(2) element"},
         [](Context& c, ReportRow& r) { check_nelson(c, r, "path-independence"); }},
        {{"nelson-reference", "exponentiation of finite-dimensional representations", "su2",
          "rotating axis vs RK4 and the closed form"},
         [](Context& c, ReportRow& r) { check_nelson(c, r, "reference"); }},
        {{"norm-conservation", "unitarity of the propagator", "virasoro affine-sl2",
          "norm drift along a homogeneous trajectory"},
         [](Context& c, ReportRow& r) { check_homogeneous(c, r, true); }},
        {{"propagator-unitarity", "unitarity of the propagator", "virasoro affine-sl2",
          "||U^* U - I|| and |det U|"},
         check_propagator_unitarity},
        {{"refinement-bound", "difference estimate for step-function refinements", "virasoro affine-sl2",
          "dyadic refinement differences vs the bound"},
         check_refinement_bound},
        {{"rotation-phase", "rotations act by e^{2 pi i n h}", "virasoro affine-sl2",
          "full rotation propagator is a scalar"},
         check_rotation_phase},
        {{"semigroup", "multiplicativity of product integrals over adjacent intervals", "virasoro affine-sl2",
          "U_{c..b} U_{b..a} vs U_{c..a}"},
         check_semigroup},
        {{"shapovalov-gram", "Shapovalov form 2nh + (n^3 - n)c/12 on L_{-n} Omega", "virasoro",
          "exact level 1 and 2 Gram entries"},
         check_shapovalov},
        {{"step-convergence", "step-function approximation of product integrals", "virasoro affine-sl2",
          "log-log slope -1 of the left-rule error"},
         check_step_convergence},
        {{"step-error", "step-function approximation of product integrals", "virasoro affine-sl2",
          "left-rule error at one step count"},
         check_step_error},
        {{"sugawara-central-charge", "Sugawara construction, central charge dim(g) l / (l + h_dual)",
          "affine-sl2", "central charge read off level 2"},
         check_sugawara_charge},
        {{"sugawara-current-commutator", "Sugawara construction, [L_m, x(n)] = -n x(m+n)", "affine-sl2",
          "safe-window residual"},
         check_sugawara_current},
        {{"sugawara-lowest-l0", "Sugawara L_0 on the lowest space", "affine-sl2",
          "lowest eigenvalue lambda(lambda+2)/(4(l+2))"},
         check_sugawara_lowest},
        {{"up-properties", "properties of U_p: lifting, reparametrisation, factorisation, inversion, translation",
          "virasoro affine-sl2", "residuals of each property"},
         check_up_properties},
        {{"unitarity-region", "unitarity of the discrete series and Kac determinant", "virasoro",
          "PSD Gram matrices and NotUnitarizable outside the region"},
         check_unitarity_region},
        {{"virasoro-commutation", "Virasoro relations with central term (m^3 - m)/12 kappa", "virasoro affine-sl2",
          "safe-window residual of [L_m, L_n]"},
         check_virasoro_commutation},
    };
    std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) { return a.info.id < b.info.id; });
    return e;
  }();
  return entries;
}

const Entry* find_entry(const std::string& id) {
  for (const auto& e : registry())
    if (e.info.id == id) return &e;
  return nullptr;
}

struct CheckOutcome {
  ReportRow row;
  std::map<std::string, std::string> files;
};

CheckOutcome run_one(const ExperimentDescriptor& d, const std::string& id, const RunOptions& opt, ModuleCache& cache) {
  CheckOutcome out;
  ReportRow& row = out.row;
  row.check = id;
  const auto start = std::chrono::steady_clock::now();
  const Entry* e = find_entry(id);
  try {
    if (!e) throw ValidationError("checks: unknown check id \"" + id + "\"");
    Context c(d, id, opt, cache);
    e->run(c, row);
    out.files = std::move(c.files);
  } catch (const TruncationOverflow& ex) {
    row.verdict = "fail";
    row.leakage = ex.leakage;
    row.message = ex.what();
  } catch (const std::exception& ex) {
    row.verdict = "error";
    row.message = ex.what();
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Descriptor parsing helpers

const std::set<std::string>& path_families() {
  static const std::set<std::string> f{"oscillatory", "constant", "rotation", "sine-diffeo", "loop-oscillatory"};
  return f;
}

int spin_to_two_j(const json& s, const std::string& where) {
  Number n;
  if (s.is_string())
    n = Number::parse(s.get<std::string>());
  else if (s.is_number())
    n = Number(s.get<double>());
  else
    throw ValidationError(where + ": expected a spin such as \"1/2\"");
  const double two = 2.0 * n.value();
  if (two < 0 || std::abs(two - std::round(two)) > 1e-12) throw ValidationError(where + ": spins must be in N/2");
  return static_cast<int>(std::lround(two));
}

std::string spin_text(int two_j) { return two_j % 2 ? std::to_string(two_j) + "/2" : std::to_string(two_j / 2); }

}  // namespace

// ---------------------------------------------------------------------------
// Public API

const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> cat = [] {
    std::vector<CheckInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return cat;
}

const CheckInfo* find_check(const std::string& id) {
  const Entry* e = find_entry(id);
  return e ? &e->info : nullptr;
}

ModuleChoice ModuleChoice::from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  ModuleChoice c;
  c.kind = j.value("kind", "virasoro");
  if (c.kind == "su2") {
    for (const auto& [k, v] : j.items())
      if (k != "kind" && k != "spins") throw ValidationError(where + "." + k + ": unknown field");
    if (j.contains("spins")) {
      if (!j["spins"].is_array() || j["spins"].empty()) throw ValidationError(where + ".spins: expected a non-empty array");
      c.two_j.clear();
      for (const auto& s : j["spins"]) c.two_j.push_back(spin_to_two_j(s, where + ".spins"));
    }
    return c;
  }
  static const std::set<std::string> known{"kind", "c", "h", "ell", "lambda", "N"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ValidationError(where + "." + k + ": unknown field");
  try {
    c.spec = spec_from_json(j);
  } catch (const ValidationError& e) {
    if (where == "module") throw;
    throw ValidationError(where + ": " + e.what());
  }
  return c;
}

json ModuleChoice::to_json() const {
  if (kind == "su2") {
    json spins = json::array();
    for (int t : two_j) spins.push_back(spin_text(t));
    return {{"kind", "su2"}, {"spins", spins}};
  }
  return spec_to_json(spec);
}

ExperimentDescriptor ExperimentDescriptor::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("descriptor: expected a JSON object");
  static const std::set<std::string> known{"name",   "description", "seed",        "module", "path",
                                           "checks", "tolerances",  "params",      "truncations", "output"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ValidationError("descriptor: unknown field \"" + k + "\"");
  ExperimentDescriptor d;
  if (j.contains("name")) {
    if (!j["name"].is_string() || j["name"].get<std::string>().empty())
      throw ValidationError("name: expected a non-empty string");
    d.name = j["name"].get<std::string>();
    if (d.name.find_first_of("/\\") != std::string::npos) throw ValidationError("name: must not contain path separators");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) throw ValidationError("seed: expected a non-negative integer");
    d.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("module")) d.module = ModuleChoice::from_json(j["module"], "module");
  if (j.contains("path")) {
    const json& p = j["path"];
    if (!p.is_object()) throw ValidationError("path: expected an object");
    for (const auto& [k, v] : p.items())
      if (k != "family" && k != "params") throw ValidationError("path." + k + ": unknown field");
    d.path.family = p.value("family", "oscillatory");
    if (!path_families().count(d.path.family))
      throw ValidationError("path.family: unknown family \"" + d.path.family + "\"");
    if (p.contains("params")) {
      if (!p["params"].is_object()) throw ValidationError("path.params: expected an object");
      d.path.params = p["params"];
    }
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_array()) throw ValidationError("checks: expected an array of check ids");
    for (const auto& c : j["checks"]) {
      if (!c.is_string()) throw ValidationError("checks: expected an array of check ids");
      const std::string id = c.get<std::string>();
      if (!find_check(id)) throw ValidationError("checks: unknown check id \"" + id + "\"");
      d.checks.push_back(id);
    }
  }
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ValidationError("tolerances: expected an object");
    for (const auto& [k, v] : j["tolerances"].items()) {
      if (!find_check(k)) throw ValidationError("tolerances: unknown check id \"" + k + "\"");
      if (!v.is_number() || !(v.get<double>() > 0)) throw ValidationError("tolerances." + k + ": must be positive");
      d.tolerances[k] = v.get<double>();
    }
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ValidationError("params: expected an object");
    for (const auto& [k, v] : j["params"].items()) {
      if (!find_check(k)) throw ValidationError("params: unknown check id \"" + k + "\"");
      if (!v.is_object()) throw ValidationError("params." + k + ": expected an object");
      if (v.contains("module")) (void)ModuleChoice::from_json(v["module"], "params." + k + ".module");
    }
    d.params = j["params"];
  }
  if (j.contains("truncations")) {
    if (!j["truncations"].is_array()) throw ValidationError("truncations: expected an array of integers");
    for (const auto& n : j["truncations"]) {
      if (!n.is_number_integer() || n.get<int>() < 1) throw ValidationError("truncations: entries must be integers >= 1");
      d.truncations.push_back(n.get<int>());
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ValidationError("output: expected a directory name");
    d.output = j["output"].get<std::string>();
  }
  return d;
}

ExperimentDescriptor ExperimentDescriptor::load(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("descriptor: cannot read " + file);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("descriptor: " + file + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json ExperimentDescriptor::to_json() const {
  json j{{"name", name},   {"seed", seed},     {"module", module.to_json()},
         {"path", {{"family", path.family}, {"params", path.params}}},
         {"checks", checks}, {"params", params}, {"truncations", truncations}};
  json tol = json::object();
  for (const auto& [k, v] : tolerances) tol[k] = v;
  j["tolerances"] = tol;
  if (!output.empty()) j["output"] = output;
  return j;
}

ExperimentDescriptor with_parameter(const ExperimentDescriptor& d, const std::string& dotted, const json& value) {
  if (dotted.empty()) throw ValidationError("sweep: empty parameter path");
  json j = d.to_json();
  json* cur = &j;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ValidationError("sweep: malformed parameter path \"" + dotted + "\"");
    parts.push_back(part);
  }
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!cur->is_object()) throw ValidationError("sweep: \"" + dotted + "\" is not addressable");
    if (!cur->contains(parts[i])) (*cur)[parts[i]] = json::object();
    cur = &(*cur)[parts[i]];
  }
  if (!cur->is_object()) throw ValidationError("sweep: \"" + dotted + "\" is not addressable");
  (*cur)[parts.back()] = value;
  return ExperimentDescriptor::from_json(j);
}

json ReportRow::to_json(bool with_time) const {
  json j{{"check", check},       {"params", params},         {"measured", measured}, {"expected", expected},
         {"tolerance", tolerance}, {"comparison", comparison}, {"verdict", verdict},   {"leakage", leakage},
         {"message", message}};
  if (with_time) j["wall_time"] = wall_time;
  return j;
}

bool RunReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.passed(); });
}

json RunReport::to_json(bool with_time) const {
  json rs = json::array();
  for (const auto& r : rows) rs.push_back(r.to_json(with_time));
  json arts = json::object();
  for (const auto& [k, v] : artifacts) arts[k] = v;
  return {{"schema_version", kReportSchemaVersion},
          {"name", name},
          {"seed", seed},
          {"module", module},
          {"passed", passed()},
          {"rows", rs},
          {"artifacts", arts}};
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

}  // namespace

RunReport run_experiment(const ExperimentDescriptor& d, const RunOptions& opt) {
  ModuleCache cache;
  std::vector<CheckOutcome> outcomes(d.checks.size());
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(d.checks.size())));
  if (jobs <= 1) {
    for (size_t i = 0; i < d.checks.size(); ++i) outcomes[i] = run_one(d, d.checks[i], opt, cache);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (size_t i = next++; i < d.checks.size(); i = next++) outcomes[i] = run_one(d, d.checks[i], opt, cache);
      });
    for (auto& th : pool) th.join();
  }
  RunReport rep;
  rep.name = d.name;
  rep.seed = d.seed;
  rep.module = d.module.to_json();
  std::map<std::string, std::string> files;
  for (auto& o : outcomes) {
    rep.rows.push_back(std::move(o.row));
    for (auto& [k, v] : o.files) files[k] = std::move(v);
  }
  for (const auto& [k, v] : files) rep.artifacts[k] = fnv1a_hex(v);
  if (opt.write_files && !d.output.empty()) {
    const std::filesystem::path dir(d.output);
    std::filesystem::create_directories(dir);
    for (const auto& [k, v] : files) write_text(dir / k, v);
    write_text(dir / (d.name + ".report.json"), rep.to_json().dump(2) + "\n");
  }
  return rep;
}

ReportRow run_check(const ExperimentDescriptor& d, const std::string& id, const RunOptions& opt) {
  ModuleCache cache;
  return run_one(d, id, opt, cache).row;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0) || !(std::abs(y[i]) > 0) || !std::isfinite(y[i])) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

bool SweepResult::passed() const {
  for (const auto& per : rows)
    for (const auto& r : per)
      if (!r.passed()) return false;
  return true;
}

SweepResult sweep(const ExperimentDescriptor& d, const std::string& parameter, const std::vector<json>& values,
                  const RunOptions& opt) {
  if (values.empty()) throw ValidationError("sweep: --values needs at least one value");
  SweepResult res;
  res.parameter = parameter;
  res.values = values;
  // A truncation sweep supplies the N values itself.
  ExperimentDescriptor base = d;
  if (parameter == "module.N") base.truncations.clear();
  std::vector<ExperimentDescriptor> ds;
  for (const auto& v : values) ds.push_back(with_parameter(base, parameter, v));
  RunOptions quiet = opt;
  quiet.write_files = false;
  for (const auto& dv : ds) res.rows.push_back(run_experiment(dv, quiet).rows);

  std::ostringstream csv;
  csv.precision(17);
  csv << "# sweep " << parameter << "\n";
  for (size_t k = 0; k < d.checks.size(); ++k) {
    std::vector<double> x, y;
    bool numeric = true;
    for (size_t i = 0; i < values.size(); ++i) {
      numeric = numeric && values[i].is_number();
      if (!numeric) break;
      x.push_back(values[i].get<double>());
      y.push_back(res.rows[i][k].measured);
    }
    const double s = numeric ? loglog_slope(x, y) : std::numeric_limits<double>::quiet_NaN();
    res.slopes[d.checks[k]] = s;
    csv << "# slope " << d.checks[k] << " " << s << "\n";
  }
  csv << "parameter,value,check,measured,expected,verdict,leakage,monotone\n";
  for (size_t k = 0; k < d.checks.size(); ++k) {
    double prev = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < values.size(); ++i) {
      const ReportRow& r = res.rows[i][k];
      const bool mono = std::abs(r.measured) <= prev;
      prev = std::abs(r.measured);
      csv << parameter << "," << (values[i].is_string() ? values[i].get<std::string>() : values[i].dump()) << ","
          << r.check << "," << r.measured << "," << r.expected << "," << r.verdict << "," << r.leakage << ","
          << (mono ? 1 : 0) << "\n";
    }
  }
  res.csv = csv.str();
  if (opt.write_files && !d.output.empty()) {
    const std::filesystem::path dir(d.output);
    std::filesystem::create_directories(dir);
    std::string safe = parameter;
    std::replace(safe.begin(), safe.end(), '.', '_');
    write_text(dir / (d.name + "-sweep-" + safe + ".csv"), res.csv);
  }
  return res;
}

}  // namespace lieexp
