// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria run through the library's check catalog on the bundled
// descriptors; Gram entries and the non-unitary point are also compared with
// the independent symbolic oracle.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "../oracles/virasoro_oracle.hpp"
#include "lieexp/experiment.hpp"

#ifndef LIEEXP_DATA_DIR
#error "LIEEXP_DATA_DIR must point at data/descriptors"
#endif

using namespace lieexp;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

ExperimentDescriptor descriptor(const std::string& file, const std::vector<std::string>& checks) {
  ExperimentDescriptor d = ExperimentDescriptor::load(std::string(LIEEXP_DATA_DIR) + "/" + file);
  d.checks = checks;
  d.output.clear();
  return d;
}

RunOptions options() {
  RunOptions o;
  o.write_files = false;
  return o;
}

// Runs the named checks; every row must pass.
void require_rows(Outcome& out, const std::string& file, const std::vector<std::string>& checks) {
  const RunReport r = run_experiment(descriptor(file, checks), options());
  for (const auto& row : r.rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s%s=%.3g", out.detail.empty() ? "" : " ", row.check.c_str(), row.measured);
    out.detail += buf;
    if (!row.passed()) {
      out.pass = false;
      out.detail += "[" + row.verdict + (row.message.empty() ? "" : ": " + row.message) + "]";
    }
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require_runtime(Outcome& out, std::chrono::steady_clock::time_point t0, double limit) {
  const double s = seconds_since(t0);
  char buf[64];
  std::snprintf(buf, sizeof buf, " time=%.1fs", s);
  out.detail += buf;
  if (s >= limit) {
    out.pass = false;
    out.detail += "[over " + std::to_string(static_cast<int>(limit)) + "s]";
  }
}

std::vector<int> modes_of(const PBWMonomial& m) {
  std::vector<int> v;
  for (const auto& [g, n] : m.factors) v.push_back(n);
  return v;
}

Outcome virasoro_commutation() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  require_rows(o, "virasoro-relations.json", {"virasoro-commutation"});
  require_runtime(o, t0, 10.0);
  return o;
}

Outcome shapovalov() {
  Outcome o;
  require_rows(o, "virasoro-relations.json", {"shapovalov-gram"});
  const Rational c = frac(1, 2), h = frac(1, 16);
  const Verma v = build_verma(HighestWeightSpec::virasoro(Number(c), Number(h), 4));
  oracle::VirasoroVacuum oracle(c, h);
  int mismatches = 0;
  for (int k = 1; k <= 4; ++k) {
    const auto g = gram_matrix_exact(v, k);
    const auto& b = v.basis[static_cast<size_t>(k)];
    for (size_t i = 0; i < b.size(); ++i)
      for (size_t j = 0; j < b.size(); ++j)
        if (g[i][j] != oracle.inner(modes_of(b[i]), modes_of(b[j]))) ++mismatches;
  }
  o.detail += " oracle_mismatches=" + std::to_string(mismatches);
  if (mismatches) o.pass = false;
  return o;
}

Outcome unitarity_region() {
  Outcome o;
  require_rows(o, "virasoro-relations.json", {"unitarity-region"});
  // Oracle side: a negative Gram eigenvalue for (1/2, 0.3) by level 8.
  const Rational c = frac(1, 2), h = frac(3, 10);
  oracle::VirasoroVacuum oracle(c, h);
  const Verma v = build_verma(HighestWeightSpec::virasoro(Number(c), Number(h), 8));
  double lowest = 0;
  for (int k = 1; k <= 8; ++k) {
    const auto& b = v.basis[static_cast<size_t>(k)];
    Eigen::MatrixXd g(b.size(), b.size());
    for (size_t i = 0; i < b.size(); ++i)
      for (size_t j = 0; j < b.size(); ++j)
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            oracle.inner(modes_of(b[i]), modes_of(b[j])).get_d();
    lowest = std::min(lowest, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff());
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, " oracle_min_eig(1/2,0.3)=%.3g", lowest);
  o.detail += buf;
  if (!(lowest < 0)) o.pass = false;
  return o;
}

Outcome rotation_phase() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  require_rows(o, "virasoro-rotation.json", {"rotation-phase"});
  require_runtime(o, t0, 30.0);
  return o;
}

Outcome holonomy() {
  Outcome o;
  require_rows(o, "virasoro-holonomy.json", {"holonomy-phase", "mobius-holonomy"});
  return o;
}

Outcome convergence() {
  Outcome o;
  require_rows(o, "virasoro-prodint.json", {"step-convergence", "dyson-order", "refinement-bound"});
  return o;
}

Outcome ode_residuals() {
  Outcome o;
  require_rows(o, "virasoro-prodint.json",
               {"norm-conservation", "homogeneous-residual", "inhomogeneous-residual", "gateaux-derivative"});
  return o;
}

Outcome estimates() {
  Outcome o;
  require_rows(o, "virasoro-relations.json", {"gw-virasoro-estimate", "exp-estimate", "exp-difference"});
  require_rows(o, "affine-sugawara.json", {"gw-loop-estimate"});
  return o;
}

Outcome sugawara() {
  Outcome o;
  require_rows(o, "affine-sugawara.json",
               {"sugawara-central-charge", "sugawara-current-commutator", "sugawara-lowest-l0"});
  return o;
}

Outcome nelson() {
  Outcome o;
  require_rows(o, "su2-nelson.json", {"nelson-axis-angle", "nelson-path-independence", "nelson-full-turn"});
  return o;
}

Outcome extension_cocycle() {
  Outcome o;
  require_rows(o, "virasoro-relations.json", {"extension-cocycle", "local-cocycle-invariance"});
  return o;
}

Outcome reproducibility() {
  Outcome o;
  const ExperimentDescriptor d = descriptor(
      "virasoro-relations.json", {"basic-estimates", "exp-difference", "local-cocycle-invariance", "extension-cocycle"});
  RunOptions par = options();
  par.jobs = 3;
  const json a = run_experiment(d, options()).to_json(false);
  const json b = run_experiment(d, options()).to_json(false);
  const json c = run_experiment(d, par).to_json(false);
  const bool same = a.dump() == b.dump() && a.dump() == c.dump();
  o.pass = same;
  o.detail = same ? "rows identical across 3 runs (jobs 1, 1, 3)" : "rows differ between runs";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*fn)();
  };
  const std::vector<Criterion> criteria = {
      {"virasoro-commutation", virasoro_commutation},
      {"shapovalov", shapovalov},
      {"unitarity-region", unitarity_region},
      {"rotation-phase", rotation_phase},
      {"holonomy", holonomy},
      {"product-integral-convergence", convergence},
      {"ode-residuals", ode_residuals},
      {"estimates", estimates},
      {"sugawara", sugawara},
      {"nelson-testbed", nelson},
      {"extension-cocycle", extension_cocycle},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %-29s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
