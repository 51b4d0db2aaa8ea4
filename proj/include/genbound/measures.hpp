#pragma once

// Finite-alphabet distributions and the divergences / information measures
// built on them. All quantities are in nats. Support violations evaluate to
// +infinity rather than throwing.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "genbound/matrix.hpp"

namespace genbound {

inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Probability vector over an indexed finite alphabet.
///
/// Construction validates nonnegativity and that the total mass is within
/// 1e-12 of one; accepted inputs are renormalized so the stored masses sum
/// to one exactly (up to rounding).
class FiniteDistribution {
 public:
  explicit FiniteDistribution(std::vector<double> probs);

  /// Normalizes arbitrary nonnegative weights (at least one positive).
  static FiniteDistribution from_weights(std::span<const double> weights);
  static FiniteDistribution uniform(std::size_t size);
  static FiniteDistribution point_mass(std::size_t size, std::size_t index);
  /// Bernoulli law on {0, 1}: mass p on symbol 1.
  static FiniteDistribution bernoulli(double p);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  bool operator==(const FiniteDistribution&) const = default;

 private:
  struct Unchecked {};
  FiniteDistribution(std::vector<double> probs, Unchecked) : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

/// Joint law over a pair of finite alphabets (rows x columns).
class JointTable {
 public:
  explicit JointTable(Matrix mass);

  /// Joint law of (X, Y) with X ~ input and Y | X ~ channel row.
  static JointTable from_channel(const FiniteDistribution& input, const Matrix& channel);
  static JointTable product(const FiniteDistribution& rows, const FiniteDistribution& cols);

  const Matrix& mass() const { return mass_; }
  std::size_t rows() const { return mass_.rows(); }
  std::size_t cols() const { return mass_.cols(); }

  FiniteDistribution row_marginal() const;
  FiniteDistribution col_marginal() const;
  JointTable product_of_marginals() const;
  /// Row-major flattening into a single distribution.
  FiniteDistribution flatten() const;

 private:
  Matrix mass_;
};

double entropy(const FiniteDistribution& p);

double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q);

/// Renyi divergence of order alpha > 1.
double renyi_divergence(const FiniteDistribution& p, const FiniteDistribution& q, double alpha);

double chi_squared(const FiniteDistribution& p, const FiniteDistribution& q);

double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q);

double mutual_information(const JointTable& joint);

/// Mutual information of input ⊗ channel, channel rows indexed by input symbol.
double mutual_information(const FiniteDistribution& input, const Matrix& channel);

/// Sub-Gaussian parameter (b - a) / 2 valid for any variable supported on [a, b].
double hoeffding_sigma(double loss_min, double loss_max);

}  // namespace genbound
