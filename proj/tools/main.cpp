// lieexp: run experiment descriptors, sweep parameters, list checks and
// build module artifacts. Exit codes: 0 pass, 1 check failure, 2 usage or
// validation error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lieexp/experiment.hpp"
#include "lieexp/serialize.hpp"

namespace {

using json = nlohmann::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

void print_rows(const std::vector<lieexp::ReportRow>& rows) {
  for (const auto& r : rows) {
    std::printf("%-5s %-28s measured=%-13.6g expected=%-13.6g leakage=%-10.3g %.2fs", r.verdict.c_str(),
                r.check.c_str(), r.measured, r.expected, r.leakage, r.wall_time);
    if (!r.message.empty()) std::printf("  %s", r.message.c_str());
    std::printf("\n");
  }
}

json read_spec(const std::string& arg) {
  std::ifstream in(arg);
  try {
    if (in) return json::parse(in);
    return json::parse(arg);
  } catch (const json::parse_error& e) {
    throw lieexp::ValidationError(std::string("module spec: not a JSON file or JSON text: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated highest-weight modules and product integrals"};
  app.require_subcommand(1);

  lieexp::RunOptions run_opt;
  run_opt.cache_dir = lieexp::cache_dir_from_env();

  std::string file;
  std::string report_path;
  bool as_json = false;
  bool omit_times = false;
  auto* run = app.add_subcommand("run", "Run the checks of a descriptor");
  run->add_option("file", file, "Experiment descriptor (JSON)")->required();
  run->add_option("-j,--jobs", run_opt.jobs, "Checks run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--report", report_path, "Write the JSON report to this file");
  run->add_flag("--json", as_json, "Print the JSON report instead of the summary");
  run->add_flag("--omit-times", omit_times, "Leave wall times out of JSON output");

  std::string param;
  std::vector<std::string> values;
  auto* sw = app.add_subcommand("sweep", "Rerun a descriptor over values of one parameter; CSV on stdout");
  sw->add_option("file", file, "Experiment descriptor (JSON)")->required();
  sw->add_option("--param", param, "Dotted parameter path, e.g. module.N or params.step-error.steps")->required();
  sw->add_option("--values", values, "Values (comma separated or repeated)")->required()->delimiter(',');
  sw->add_option("-j,--jobs", run_opt.jobs, "Checks run concurrently")->check(CLI::PositiveNumber);

  bool list_json = false;
  auto* list = app.add_subcommand("list-checks", "Print the check catalog");
  list->add_flag("--json", list_json, "JSON output");

  std::string spec_arg, module_out;
  auto* build = app.add_subcommand("build-module", "Build (or load from the cache) a module artifact");
  build->add_option("spec", spec_arg, "Module spec: JSON file or inline JSON")->required();
  build->add_option("-o,--out", module_out, "Write the module artifact JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*run) {
      const lieexp::ExperimentDescriptor d = lieexp::ExperimentDescriptor::load(file);
      const lieexp::RunReport rep = lieexp::run_experiment(d, run_opt);
      const json j = rep.to_json(!omit_times);
      if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw lieexp::ValidationError("--report: cannot write " + report_path);
        out << j.dump(2) << "\n";
      }
      if (as_json) {
        std::cout << j.dump(2) << "\n";
      } else {
        print_rows(rep.rows);
        std::printf("%s: %zu checks, %s\n", rep.name.c_str(), rep.rows.size(), rep.passed() ? "all pass" : "FAILURES");
      }
      return rep.passed() ? kPass : kFail;
    }
    if (*sw) {
      const lieexp::ExperimentDescriptor d = lieexp::ExperimentDescriptor::load(file);
      std::vector<json> vs;
      for (const auto& v : values) vs.push_back(parse_value(v));
      const lieexp::SweepResult res = lieexp::sweep(d, param, vs, run_opt);
      std::cout << res.csv;
      return res.passed() ? kPass : kFail;
    }
    if (*list) {
      const auto& cat = lieexp::check_catalog();
      if (list_json) {
        json arr = json::array();
        for (const auto& c : cat)
          arr.push_back({{"id", c.id}, {"anchor", c.anchor}, {"modules", c.modules}, {"summary", c.summary}});
        std::cout << arr.dump(2) << "\n";
      } else {
        for (const auto& c : cat) std::printf("%-28s %-22s %s\n", c.id.c_str(), c.modules.c_str(), c.anchor.c_str());
      }
      return kPass;
    }
    if (*build) {
      const lieexp::HighestWeightSpec s = lieexp::spec_from_json(read_spec(spec_arg));
      bool cached = false;
      const lieexp::ModulePtr m = lieexp::load_or_build(s, run_opt.cache_dir, &cached);
      std::ostringstream dims;
      for (size_t k = 0; k < m->dims.size(); ++k) dims << (k ? "," : "") << m->dims[k];
      std::printf("key=%s total=%d levels=[%s] %s\n", lieexp::spec_key(s).c_str(), m->total, dims.str().c_str(),
                  cached ? "(cache)" : "(built)");
      if (!module_out.empty()) {
        std::ofstream out(module_out);
        if (!out) throw lieexp::ValidationError("--out: cannot write " + module_out);
        out << lieexp::module_to_json(*m).dump() << "\n";
      }
      return kPass;
    }
  } catch (const lieexp::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  }
  return kUsage;
}
