#pragma once

// Experiment configuration: an INI file with the sections
//
//   [scenario]  preset | inline alphabets, losses, laws, n, mu sweep
//   [learner]   kind = erm | gibbs | constant, beta, index
//   [sweep]     r = explicit list, or r_min / r_max / points (nats)
//   [bounds]    list = comma separated bound names, sigma2, gamma, v_n
//   [output]    dir, stem, unit = nats | bits, svg, seed, threads
//   [validate]  suite, scenarios, betas, max_n, eta_points, slack, corrupt
//   [misspec]   n, sigma2, delta, eps_base, eps_half, gamma grid, regimes
//
// Matrices are written "rows cols : v11 v12 ... " in row-major order.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "genbound/learners.hpp"
#include "genbound/scenario.hpp"

namespace genbound::experiments {

enum class Unit { Nats, Bits };

struct ValidateConfig {
  /// "random": seeded tiny scenarios with Gibbs learners; "config": the configured scenario and learner.
  std::string suite = "random";
  int scenarios = 20;
  std::vector<double> betas{0.5, 1.0, 2.0};
  int max_n = 5;
  int max_hypotheses = 3;
  int eta_points = 50;
  double slack = 1e-8;
  /// Test hook: name of one inequality whose right-hand side is pushed below its left-hand side.
  std::string corrupt;
};

struct MisspecConfig {
  int n = 100;
  double sigma2 = 0.25;
  double delta = 0.1;
  double eps_base = 0.0;
  double eps_half = 0.0;
  std::vector<double> gammas;
  /// "zero", "inv_sqrt_n", or a nonnegative constant written as a number.
  std::vector<std::string> regimes{"zero", "inv_sqrt_n"};
};

struct ExperimentConfig {
  Scenario scenario = preset_scenario("fig1");
  /// Maximize over Bernoulli test = train laws instead of using the given laws.
  bool mu_sweep = false;
  int mu_grid = 201;
  LearnerSpec learner;
  std::vector<double> rates;  // nats
  std::vector<std::string> bounds;
  std::optional<double> sigma2;  // default: scenario.loss_sigma2()
  std::optional<double> gamma;   // default: D(mu' || mu)
  std::optional<double> v_n;     // default: v_n_exact
  std::filesystem::path out_dir = ".";
  std::string stem = "run";
  Unit unit = Unit::Nats;
  bool svg = false;
  std::uint64_t seed = 0;
  int threads = 1;
  ValidateConfig validate;
  MisspecConfig misspec;

  double effective_sigma2() const;
  double effective_gamma() const;
};

/// Parses configuration text. Throws ConfigError naming the field and line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Built-in figure configurations "fig1".."fig4".
ExperimentConfig preset_config(const std::string& name);

/// Canonical text: every field spelled out in a fixed order, numbers round-trip exact.
std::string canonical_text(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Tiny random scenario for the validation suite (|Z| = 2, full-support laws).
Scenario random_tiny_scenario(std::uint64_t seed, int index, int max_n, int max_hypotheses);

}  // namespace genbound::experiments
