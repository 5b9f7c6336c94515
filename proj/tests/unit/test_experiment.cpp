#include <doctest.h>

#include <cmath>
#include <string>

#include "lieexp/experiment.hpp"

using namespace lieexp;
using nlohmann::json;

namespace {

json rotation_descriptor() {
  return json{{"name", "t"},
              {"module", {{"kind", "virasoro"}, {"c", "1/2"}, {"h", "1/16"}, {"N", 6}}},
              {"path", {{"family", "rotation"}}},
              {"checks", {"rotation-phase", "propagator-unitarity"}}};
}

std::string validation_message(const json& j) {
  try {
    ExperimentDescriptor::from_json(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

RunOptions no_files() {
  RunOptions o;
  o.write_files = false;
  return o;
}

}  // namespace

TEST_CASE("catalog is sorted and holds the core checks") {
  const auto& cat = check_catalog();
  CHECK(cat.size() >= 20);
  for (size_t i = 1; i < cat.size(); ++i) CHECK(cat[i - 1].id < cat[i].id);
  CHECK(find_check("holonomy-phase") != nullptr);
  CHECK(find_check("gw-virasoro-estimate") != nullptr);
  CHECK(find_check("no-such-check") == nullptr);
}

TEST_CASE("validation errors name the offending field or id") {
  json j = rotation_descriptor();
  j["checks"] = {"rotation-phase", "bogus-check"};
  CHECK(validation_message(j).find("bogus-check") != std::string::npos);
  j = rotation_descriptor();
  j["colour"] = "red";
  CHECK(validation_message(j).find("colour") != std::string::npos);
  j = rotation_descriptor();
  j["module"]["N"] = -2;
  CHECK(validation_message(j).find("N") != std::string::npos);
  j = rotation_descriptor();
  j["tolerances"] = {{"rotation-phase", -1.0}};
  CHECK(validation_message(j).find("tolerances.rotation-phase") != std::string::npos);
}

TEST_CASE("an empty check list passes") {
  json j = rotation_descriptor();
  j["checks"] = json::array();
  const RunReport r = run_experiment(ExperimentDescriptor::from_json(j), no_files());
  CHECK(r.rows.empty());
  CHECK(r.passed());
}

TEST_CASE("runs are reproducible and independent of the job count") {
  json j = rotation_descriptor();
  j["checks"] = {"rotation-phase", "basic-estimates", "local-cocycle-invariance", "propagator-unitarity"};
  const ExperimentDescriptor d = ExperimentDescriptor::from_json(j);
  RunOptions one = no_files();
  RunOptions two = no_files();
  two.jobs = 2;
  const json a = run_experiment(d, one).to_json(false);
  const json b = run_experiment(d, one).to_json(false);
  const json c = run_experiment(d, two).to_json(false);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a.at("schema_version") == kReportSchemaVersion);
}

TEST_CASE("the rotation phase row passes with its tolerance") {
  const RunReport r = run_experiment(ExperimentDescriptor::from_json(rotation_descriptor()), no_files());
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].check == "rotation-phase");
  CHECK(r.rows[0].passed());
  CHECK(r.rows[0].measured <= r.rows[0].tolerance);
}

TEST_CASE("TruncationOverflow becomes a failed row") {
  json j = rotation_descriptor();
  j["path"] = {{"family", "oscillatory"}};
  j["checks"] = {"norm-conservation"};
  j["params"] = {{"norm-conservation", {{"leakage_limit", 1e-30}}}};
  const RunReport r = run_experiment(ExperimentDescriptor::from_json(j), no_files());
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].verdict == "fail");
  CHECK_FALSE(r.passed());
}

TEST_CASE("with_parameter edits dotted paths and revalidates") {
  const ExperimentDescriptor d = ExperimentDescriptor::from_json(rotation_descriptor());
  CHECK(with_parameter(d, "module.N", 4).module.spec.N == 4);
  CHECK(with_parameter(d, "seed", 7).seed == 7);
  CHECK_THROWS_AS(with_parameter(d, "module.N", -1), ValidationError);
}

TEST_CASE("sweeps produce one block of rows per value and a CSV") {
  json j = rotation_descriptor();
  j["checks"] = {"rotation-phase"};
  const SweepResult s = sweep(ExperimentDescriptor::from_json(j), "module.N", {json(4)}, no_files());
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].size() == 1);
  CHECK(s.passed());
  CHECK(s.csv.rfind("# sweep module.N", 0) == 0);
  CHECK(s.csv.find("parameter,value,check,measured,expected,verdict,leakage,monotone") != std::string::npos);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4, 8}, {1, 0.25, 0.0625, 0.015625}) == doctest::Approx(-2.0));
  CHECK(std::isnan(loglog_slope({1, 2}, {1, 0})));
}
