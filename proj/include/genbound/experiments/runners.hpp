#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "genbound/experiments/config.hpp"
#include "genbound/experiments/output.hpp"

namespace genbound::experiments {

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to per-index slots; the first exception by index is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Bounds against r: xu_raginsky, cor1_upper, d2, d2_max_mu, d2_constrained, d1_exact.
/// D2-type columns are evaluated at r / n.
SweepResult run_curve(const ExperimentConfig& config);

/// D2(r/n) and its auxiliary-loss constrained version (default columns when the list is empty).
SweepResult run_constrained_curve(const ExperimentConfig& config);

struct InequalityCheck {
  std::string instance;
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = true;
  double slack() const { return rhs - lhs; }
};

struct ValidationReport {
  std::vector<InequalityCheck> checks;
  /// Canonical config text of every instance with a failing check.
  std::vector<std::string> failing_instances;

  bool passed() const;
  std::string text() const;
};

/// Sandwich inequalities on a seeded suite of tiny scenarios with Gibbs learners.
ValidationReport run_validate(const ExperimentConfig& config);

/// Both misspecification bounds over the gamma grid, two columns per stability regime.
SweepResult run_misspec(const ExperimentConfig& config);

/// Exact quantities and bounds for the configured learner and scenario.
std::vector<std::pair<std::string, double>> run_learner(const ExperimentConfig& config);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string summary;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNonConvergence = 3;

/// Runs a subcommand ("curve", "constrained", "validate", "misspec", "learner")
/// and writes its outputs under config.out_dir. Throws ConfigError on bad input.
RunOutcome execute(const std::string& command, const ExperimentConfig& config);

}  // namespace genbound::experiments
