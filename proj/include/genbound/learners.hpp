#pragma once

// Exact analysis of small learning algorithms: the joint law of the training
// set S' = (Z'_1..Z'_n) ~ (mu')^n and the learner output W', enumerated in
// full, plus Monte Carlo estimates of the ERM auxiliary risk.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "genbound/matrix.hpp"
#include "genbound/measures.hpp"
#include "genbound/scenario.hpp"

namespace genbound {

enum class LearnerKind { Erm, Gibbs, Constant };

/// Tie-breaking rule of the empirical risk minimizer.
enum class TieBreak { LowestIndex };

struct LearnerSpec {
  LearnerKind kind = LearnerKind::Erm;
  double beta = 0.0;               // Gibbs inverse temperature
  std::size_t constant_index = 0;  // Constant output
  TieBreak tie_break = TieBreak::LowestIndex;

  static LearnerSpec erm() { return {}; }
  static LearnerSpec gibbs(double beta) { return {LearnerKind::Gibbs, beta, 0, TieBreak::LowestIndex}; }
  static LearnerSpec constant(std::size_t index) { return {LearnerKind::Constant, 0.0, index, TieBreak::LowestIndex}; }

  void validate(std::size_t hypotheses) const;
  std::string describe() const;
};

/// Largest |Z|^n * |W| handled by exact enumeration.
inline constexpr double kEnumerationCap = 1e6;

/// Joint law of (S', W'). Dataset index d encodes z_i = (d / |Z|^i) mod |Z|.
class ExactJoint {
 public:
  ExactJoint(Matrix table, Matrix empirical_risk, std::vector<double> dataset_law, std::vector<double> test_risk,
             std::size_t instances, int n);

  /// P(s', w), rows indexed by dataset.
  const Matrix& table() const { return table_; }
  /// L_{s'}(w), rows indexed by dataset.
  const Matrix& empirical_risk() const { return empirical_risk_; }
  const std::vector<double>& dataset_law() const { return dataset_law_; }
  const std::vector<double>& test_risk() const { return test_risk_; }

  std::size_t datasets() const { return table_.rows(); }
  std::size_t hypotheses() const { return table_.cols(); }
  std::size_t instances() const { return instances_; }
  int n() const { return n_; }

  /// Symbol of the i-th sample of dataset d.
  std::size_t sample(std::size_t dataset, int i) const;

  FiniteDistribution output_law() const;
  JointTable joint() const { return JointTable(table_); }

 private:
  Matrix table_;
  Matrix empirical_risk_;
  std::vector<double> dataset_law_;
  std::vector<double> test_risk_;
  std::size_t instances_;
  int n_;
};

/// Throws CapExceeded when |Z|^n * |W| > 1e6.
ExactJoint enumerate_joint(const Scenario& s, const LearnerSpec& learner);

/// E[L_mu(W') - L_{S'}(W')].
double exact_gen_error(const ExactJoint& j);

/// I(S'; W').
double exact_mi(const ExactJoint& j);

/// I(Z'_i; W') for 0 <= i < n.
double per_sample_mi(const ExactJoint& j, std::size_t i);

/// P[|L_mu(W') - L_{S'}(W')| >= eta], exact. Gaps within 1e-12 of eta count as reaching it.
double empirical_tail(const ExactJoint& j, double eta);

/// E over S' ~ (mu')^n of min_w (1/n) sum_i aux(w, Z'_i), summed over count vectors.
double v_n_exact(const Scenario& s);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  /// max_w range of aux(w, .); one sample changes the ERM value by at most this / n.
  double sensitivity = 0.0;
  int n = 1;
  int trials = 0;

  /// McDiarmid deviation of one dataset's ERM value: c sqrt(ln(2/fail) / (2n)).
  double single_dataset_margin(double fail_probability) const;
  /// McDiarmid deviation of the trial average: c sqrt(ln(2/fail) / (2 n trials)).
  double estimator_margin(double fail_probability) const;
};

/// Average ERM auxiliary risk over `trials` datasets drawn by a counter-based
/// generator; the same seed gives bit-identical results.
MonteCarloEstimate v_n_monte_carlo(const Scenario& s, int trials, std::uint64_t seed);

/// Counter-based uniform draw in [0, 1) from (seed, stream, index).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace genbound
