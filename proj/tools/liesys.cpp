// liesys: scenario runner and acceptance suite.
//
//   liesys run <scenario.json>...   run scenarios (in parallel), exit 1 if any threshold fails
//   liesys list                     print systems, profiles, shapes and pipelines as JSON
//   liesys verify                   run the built-in acceptance criteria
//
// Exit status: 0 success, 1 threshold or runtime failure, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liesys/acceptance.hpp"
#include "liesys/errors.hpp"
#include "liesys/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Outcome {
  int status = kOk;
  std::string line;
};

int run_batch(const std::vector<std::string>& files, const liesys::RunOptions& options) {
  std::vector<liesys::Scenario> scenarios;
  for (const auto& f : files) {
    try {
      scenarios.push_back(liesys::load_scenario(f));
    } catch (const liesys::UsageError& e) {
      std::cerr << "liesys: " << f << ": " << e.what() << "\n";
      return kUsage;
    }
  }

  std::vector<Outcome> outcomes(scenarios.size());
  const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& s = scenarios[static_cast<std::size_t>(i)];
    auto& out = outcomes[static_cast<std::size_t>(i)];
    try {
      const auto result = liesys::run(s, options);
      out.status = result.passed ? kOk : kFailed;
      out.line = std::string(result.passed ? "PASS " : "FAIL ") + s.name + " (" + s.pipeline +
                 (s.method.empty() ? "" : " " + s.method) + ")";
      if (result.summary.contains("error")) {
        const auto& err = result.summary["error"];
        out.line += ": " + err["message"].get<std::string>();
        if (err.contains("last_good_time")) {
          char buf[64];
          std::snprintf(buf, sizeof buf, " (last good time %.6g)", err["last_good_time"].get<double>());
          out.line += buf;
        }
      }
      const auto& metrics = result.summary["metrics"];
      if (metrics.is_object() && metrics.contains("runs")) {
        for (const auto& r : metrics["runs"]) {
          if (!r.contains("error")) continue;
          char buf[64];
          std::snprintf(buf, sizeof buf, " (last good time %.6g)", r["last_good_time"].get<double>());
          out.line += "\n  state " + std::to_string(r["index"].get<std::size_t>()) + ": " +
                      r["error"].get<std::string>() + buf;
        }
      }
      for (const auto& c : result.summary["checks"]) {
        if (!c["passed"].get<bool>()) out.line += "\n  threshold " + c["name"].get<std::string>() + " violated";
      }
    } catch (const liesys::UsageError& e) {
      out.status = kUsage;
      out.line = "ERROR " + s.name + ": " + e.what();
    } catch (const std::exception& e) {
      out.status = kFailed;
      out.line = "FAIL " + s.name + ": " + e.what();
    }
  }

  int status = kOk;
  for (const auto& o : outcomes) {
    std::cout << o.line << "\n";
    status = std::max(status, o.status);
  }
  return status;
}

int verify(const liesys::RunOptions& options) {
  std::filesystem::path dir = ".";
  if (options.out_dir) {
    dir = *options.out_dir;
  } else if (const char* env = std::getenv("LIESYS_OUT_DIR"); env && *env) {
    dir = env;
  }
  const auto report = liesys::run_acceptance(options.seed.value_or(0), dir);
  for (const auto& c : report.criteria) {
    std::printf("criterion %d: %s  %s  [%s]\n", c.id, c.passed() ? "PASS" : "FAIL", c.title.c_str(),
                c.detail().c_str());
  }
  std::printf("%s\n", report.passed() ? "all criteria passed" : "acceptance FAILED");
  return report.passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie-system integrator, invariant checker and superposition toolkit"};
  app.require_subcommand(1);

  std::string out_dir;
  std::uint64_t seed = 0;
  double tol_override = 0.0;
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides $LIESYS_OUT_DIR and the scenario)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for random probes and initial states");
  auto* tol_opt = app.add_option("--tol-override", tol_override, "Replace the scenario's abs/rel tolerances")
                      ->check(CLI::PositiveNumber);

  std::vector<std::string> files;
  auto* run_cmd = app.add_subcommand("run", "Run one or more scenario files");
  run_cmd->add_option("scenario", files, "Scenario JSON files")->required()->check(CLI::ExistingFile);
  run_cmd->fallthrough();
  app.add_subcommand("list", "Print the catalog of systems and pipelines")->fallthrough();
  app.add_subcommand("verify", "Run the built-in acceptance suite")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  liesys::RunOptions options;
  if (*out_opt) options.out_dir = out_dir;
  if (*seed_opt) options.seed = seed;
  if (*tol_opt) options.tol_override = tol_override;

  try {
    if (app.got_subcommand("list")) {
      std::cout << liesys::catalog().dump(2) << "\n";
      return kOk;
    }
    if (app.got_subcommand("verify")) return verify(options);
    return run_batch(files, options);
  } catch (const liesys::UsageError& e) {
    std::cerr << "liesys: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "liesys: " << e.what() << "\n";
    return kFailed;
  }
}
