#pragma once

// Rate-distortion-type programs over finite alphabets:
//
//   maximize E[gain(W, X)]  subject to  I(X; W) <= r   (X ~ input)
//
// solved by Blahut-Arimoto alternating maximization of the Lagrangian
// E[gain] - I / slope, with the slope swept or bisected to reach a target
// rate. D2 (single-sample gap bound), its auxiliary-loss constrained
// variant, and the tiny-n D1 oracle are all instances of this program.

#include <optional>
#include <vector>

#include "genbound/matrix.hpp"
#include "genbound/measures.hpp"
#include "genbound/scenario.hpp"

namespace genbound {

/// Conditional law P(w | x); rows indexed by the input symbol x.
struct Channel {
  Matrix cond;
};

struct BaOptions {
  /// Certified bound on the Lagrangian suboptimality at which iteration stops.
  double tol = 1e-10;
  int max_iter = 10000;
};

struct RDPoint {
  double slope = 0.0;  // +inf marks the saturation (unconstrained) point
  double rate = 0.0;   // nats
  double value = 0.0;  // E[gain]
  std::optional<double> aux_expectation;
  Channel channel;
  bool converged = true;
  int iterations = 0;
};

/// Traced curve r -> D(r): upper concave envelope of solver points, sorted by rate.
struct RDCurve {
  std::vector<RDPoint> points;
  bool converged = true;

  /// Linear interpolation on the envelope; flat beyond the last point.
  double value_at(double rate) const;
  double max_rate() const { return points.empty() ? 0.0 : points.back().rate; }
};

struct SweepOptions {
  int grid_slopes = 64;
  double min_slope = 1e-3;
  double max_slope = 1e3;
  /// Adjacent points whose rates differ by more than this are refined by bisection.
  double max_rate_jump = 0.05;
  int max_refinements = 12;
};

/// Channel program: input law, gain to maximize, and an optional auxiliary
/// expectation tracked alongside. The tilt is exp(slope * (gain + aux_weight * aux)).
class TiltedChannelProblem {
 public:
  /// `gain` and `aux` are indexed (hypothesis, input symbol).
  TiltedChannelProblem(FiniteDistribution input, Matrix gain, std::optional<Matrix> aux = std::nullopt,
                       double aux_weight = 0.0, BaOptions options = {});

  const FiniteDistribution& input() const { return input_; }
  std::size_t hypotheses() const { return gain_.rows(); }

  /// One Blahut-Arimoto solve at a fixed slope (slope 0: best rate-0 mixture).
  RDPoint solve_slope(double slope) const;
  /// Minimum-rate channel among those maximizing the tilted objective pointwise.
  RDPoint saturation() const;
  /// Point on the curve at rate r, refined by slope bisection and time sharing.
  RDPoint at_rate(double rate) const;
  RDCurve trace(const SweepOptions& sweep = {}) const;

  /// Evaluates (rate, value, aux) of an arbitrary channel against this problem.
  RDPoint evaluate(Channel channel, double slope) const;

 private:
  double objective(std::size_t w, std::size_t x) const;
  RDPoint mix(const RDPoint& lo, const RDPoint& hi, double theta) const;

  FiniteDistribution input_;
  Matrix gain_;
  std::optional<Matrix> aux_;
  double aux_weight_;
  BaOptions options_;
};

/// Slope grid {0} ∪ geometric grid on [min_slope, max_slope].
std::vector<double> slope_grid(const SweepOptions& sweep = {});

/// D2 program of a scenario: input mu', gain g(w,z).
TiltedChannelProblem d2_problem(const Scenario& s, const BaOptions& options = {});

RDPoint ba_fixed_slope(const Scenario& s, double slope, double tol = 1e-10, int max_iter = 10000);

/// D2(r): largest expected single-sample gap over channels Z' -> W with I <= r.
double d2_at(const Scenario& s, double rate);
RDPoint d2_point(const Scenario& s, double rate);
RDCurve d2_curve(const Scenario& s, const SweepOptions& sweep = {});

struct ConstrainedResult {
  RDPoint point;        // time-shared channel; value is the bound
  double aux_weight;    // multiplier on the auxiliary loss (0 when inactive)
  bool constraint_active;
};

/// D2 with the extra constraint E[aux_loss(W, Z')] >= v_n. Throws Infeasible.
ConstrainedResult d2_constrained(const Scenario& s, double rate, double v_n);
double d2_constrained_at(const Scenario& s, double rate, double v_n);

/// D1(r) on the product alphabet Z^n; requires |Z|^n <= 4096.
double d1_exact_tiny(const Scenario& s, double rate);

/// Exhaustive search over channels with row probabilities on a step grid.
/// Requires |W| * |Z| <= 12. Returns one maximum per requested rate.
std::vector<double> brute_force_d2(const Scenario& s, const std::vector<double>& rates, double grid_step);
double brute_force_d2(const Scenario& s, double rate, double grid_step);

}  // namespace genbound
