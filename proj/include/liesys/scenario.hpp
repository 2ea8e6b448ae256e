#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "liesys/integrate.hpp"
#include "liesys/systems.hpp"

namespace liesys {

/// Frequency selector: "constant" {value}, "sinusoidal" {offset, amplitude},
/// or "step" {switch_time, before, after}.
struct FrequencySpec {
  std::string kind = "constant";
  double value = 1.0;
  double offset = 2.0;
  double amplitude = 1.0;
  double switch_time = 1.0;
  double before = 1.0;
  double after = 2.0;

  FrequencyProfile build() const;
};

/// Shape selector: "constant" {c} or "power" {c, p} (c * u^p).
struct ShapeSpec {
  std::string kind = "constant";
  double c = 1.0;
  int p = 0;

  ShapeFunction build() const;
};

struct SystemSpec {
  std::string name;
  double k = 1.0;
  FrequencySpec frequency;
  ShapeSpec f{"power", 1.0, 2};
  ShapeSpec g{"constant", 1.0, 0};
  HalfPlane half = HalfPlane::positive;

  SystemDef build() const;
};

struct Scenario {
  std::string name;
  SystemSpec system;
  std::string pipeline;  // integrate | drift | superpose | reduce | verify-algebra | minimal-m | group-solve
  std::string method;    // superpose: linear | quadrature | pinney; reduce: dalembert | pinney-self | pinney-osc
  std::vector<State> initial_states;
  int random_initial_states = 0;
  double t0 = 0.0;
  double t1 = 1.0;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = 0.0;  // 0: unbounded
  std::uint64_t seed = 0;
  int samples = 201;
  int probes = 100;
  int max_copies = 4;
  int probes_per_level = 7;
  double rank_tol = 1e-8;
  std::map<std::string, double> thresholds;
  std::string out_dir;
};

/// Validates and converts a scenario document. Throws UsageError naming the field.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_override;
};

struct RunResult {
  bool passed = false;
  nlohmann::json summary;
  std::vector<std::filesystem::path> files;
};

/// Output directory precedence: options.out_dir, $LIESYS_OUT_DIR, scenario.out_dir, ".".
std::filesystem::path resolve_out_dir(const Scenario& s, const RunOptions& options);

/// Executes the scenario's pipeline and writes `<name>*.csv` plus
/// `<name>.summary.json`. Runtime failures (singularities, domain errors) are
/// reported in the summary with passed = false rather than thrown.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

/// Systems, frequency profiles, shapes and pipelines with their parameters.
nlohmann::json catalog();

}  // namespace liesys
