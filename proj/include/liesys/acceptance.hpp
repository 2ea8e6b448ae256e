#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace liesys {

/// One numeric check inside a criterion: passes when value <= limit.
struct AcceptanceCheck {
  std::string name;
  double value;
  double limit;
  bool passed() const { return value <= limit; }
};

struct CriterionResult {
  int id;
  std::string title;
  std::vector<AcceptanceCheck> checks;
  std::string error;  // set when the criterion threw before finishing

  bool passed() const;
  /// Worst check as "name value <= limit".
  std::string detail() const;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  std::vector<std::filesystem::path> files;
  bool passed() const;
};

/// Built-in acceptance suite (criteria 1-9). All randomness derives from
/// `seed`; when `out_dir` is nonempty, writes acceptance_c<N>.csv per
/// criterion and acceptance.summary.json there.
AcceptanceReport run_acceptance(std::uint64_t seed = 0, const std::filesystem::path& out_dir = {});

/// Single criterion, 1..9. Throws std::out_of_range otherwise.
CriterionResult run_criterion(int id, std::uint64_t seed = 0);

}  // namespace liesys
