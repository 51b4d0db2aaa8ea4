#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "genbound/matrix.hpp"
#include "genbound/measures.hpp"

namespace genbound {

/// Loss values indexed (hypothesis, instance). Every entry is finite.
class LossMatrix {
 public:
  explicit LossMatrix(Matrix values);

  /// Tabulates loss(w, z) over hypothesis and instance labels.
  static LossMatrix tabulate(const std::vector<double>& hypotheses, const std::vector<double>& instances,
                             const std::function<double(double, double)>& loss);

  const Matrix& values() const { return values_; }
  std::size_t hypotheses() const { return values_.rows(); }
  std::size_t instances() const { return values_.cols(); }
  double operator()(std::size_t w, std::size_t z) const { return values_(w, z); }

  double min() const;
  double max() const;
  /// Largest per-hypothesis range max_z loss(w,z) - min_z loss(w,z).
  double max_row_range() const;
  /// Largest per-instance range max_w loss(w,z) - min_w loss(w,z).
  double max_col_range() const;

 private:
  Matrix values_;
};

/// Population risk L_dist(w) = sum_z dist(z) loss(w, z) for every hypothesis.
std::vector<double> population_risk(const LossMatrix& loss, const FiniteDistribution& dist);

/// A learning problem on finite alphabets with train/test mismatch.
struct Scenario {
  FiniteDistribution test_dist;   // mu: risk is evaluated here
  FiniteDistribution train_dist;  // mu': training samples are drawn here
  std::vector<double> hypothesis_labels;
  std::vector<double> instance_labels;
  LossMatrix loss;
  std::optional<LossMatrix> aux_loss;
  int n = 1;

  std::size_t hypotheses() const { return loss.hypotheses(); }
  std::size_t instances() const { return loss.instances(); }

  /// Throws std::invalid_argument / DimensionError when inconsistent.
  void validate() const;

  /// Largest sub-Gaussian variance proxy of loss(w, Z) over w, from Hoeffding's lemma.
  double loss_sigma2() const;
};

/// Centered gain g(w,z) = L_mu(w) - loss(w,z); the negated distortion.
class GapMatrix {
 public:
  GapMatrix(Matrix values, std::vector<double> test_risk)
      : values_(std::move(values)), test_risk_(std::move(test_risk)) {}

  const Matrix& values() const { return values_; }
  const std::vector<double>& test_risk() const { return test_risk_; }
  double operator()(std::size_t w, std::size_t z) const { return values_(w, z); }

 private:
  Matrix values_;
  std::vector<double> test_risk_;
};

GapMatrix gap_matrix(const Scenario& s);

/// Uniform grid {0, 1/(G-1), ..., 1}; G >= 2.
std::vector<double> discretize_interval_hypothesis(int grid_points);

/// Named loss functions of (w, z) used by the presets and the config format.
std::optional<std::function<double(double, double)>> named_loss(const std::string& name);

/// Built-in figure scenarios: "fig1".."fig4". Test and train laws are Bern(0.5).
Scenario preset_scenario(const std::string& name, int grid_points = 201);

}  // namespace genbound
