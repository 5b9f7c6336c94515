#pragma once

// Experiment descriptors, the check catalog, run reports and parameter
// sweeps. Schemas: docs/schemas.md.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lieexp/hwmod.hpp"

namespace lieexp {

inline constexpr int kReportSchemaVersion = 1;

struct CheckInfo {
  std::string id;
  std::string anchor;   // the mathematical statement the check exercises
  std::string modules;  // module kinds the check accepts
  std::string summary;
};

/// Static catalog, sorted by id.
const std::vector<CheckInfo>& check_catalog();
const CheckInfo* find_check(const std::string& id);

/// Module choice of a descriptor: a highest-weight spec or an su(2) direct sum.
struct ModuleChoice {
  std::string kind = "virasoro";  // virasoro | affine-sl2 | su2
  HighestWeightSpec spec;
  std::vector<int> two_j{1, 3};  // su2 only

  static ModuleChoice from_json(const nlohmann::json& j, const std::string& where);
  [[nodiscard]] nlohmann::json to_json() const;
};

struct PathChoice {
  std::string family = "oscillatory";  // oscillatory | constant | rotation | sine-diffeo | loop-oscillatory
  nlohmann::json params = nlohmann::json::object();
};

struct ExperimentDescriptor {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  ModuleChoice module;
  PathChoice path;
  std::vector<std::string> checks;
  std::map<std::string, double> tolerances;  // per check id
  nlohmann::json params = nlohmann::json::object();  // per check id objects
  std::vector<int> truncations;  // N values for truncation-aware checks
  std::string output;            // directory for files; empty: none

  /// Parses and validates; ValidationError names the offending field or id.
  static ExperimentDescriptor from_json(const nlohmann::json& j);
  static ExperimentDescriptor load(const std::string& file);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Sets a dotted path ("module.N", "params.step-error.steps", "seed") in the
/// descriptor's JSON form and re-validates.
ExperimentDescriptor with_parameter(const ExperimentDescriptor& d, const std::string& dotted,
                                    const nlohmann::json& value);

struct ReportRow {
  std::string check;
  nlohmann::json params = nlohmann::json::object();
  double measured = 0;
  double expected = 0;
  double tolerance = 0;
  std::string comparison = "le";  // le: measured <= expected; near: |measured - expected| <= tolerance
  std::string verdict = "fail";   // pass | fail | error
  double leakage = 0;
  double wall_time = 0;
  std::string message;

  [[nodiscard]] bool passed() const { return verdict == "pass"; }
  [[nodiscard]] nlohmann::json to_json(bool with_time = true) const;
};

struct RunReport {
  std::string name;
  std::uint64_t seed = 0;
  nlohmann::json module;
  std::vector<ReportRow> rows;
  std::map<std::string, std::string> artifacts;  // file -> FNV-1a hash

  [[nodiscard]] bool passed() const;
  [[nodiscard]] nlohmann::json to_json(bool with_time = true) const;
};

struct RunOptions {
  std::optional<std::string> cache_dir;  // module cache (LIEEXP_CACHE_DIR)
  int jobs = 1;                          // checks run concurrently
  bool write_files = true;               // honour the descriptor's output directory
};

/// Runs every requested check; rows follow descriptor order.
RunReport run_experiment(const ExperimentDescriptor& d, const RunOptions& opt = {});

/// One check against the descriptor. Library errors become error rows;
/// TruncationOverflow becomes a failed row.
ReportRow run_check(const ExperimentDescriptor& d, const std::string& id, const RunOptions& opt = {});

struct SweepResult {
  std::string parameter;
  std::vector<nlohmann::json> values;
  std::vector<std::vector<ReportRow>> rows;  // per value, per check
  std::map<std::string, double> slopes;      // log-log fit of |measured| against value, per check
  std::string csv;

  [[nodiscard]] bool passed() const;
};

SweepResult sweep(const ExperimentDescriptor& d, const std::string& parameter, const std::vector<nlohmann::json>& values,
                  const RunOptions& opt = {});

/// Least-squares slope of log|y| against log x; NaN unless all values are positive.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lieexp
