#pragma once

// Closed-form generalization bounds. Every evaluator is a pure function of
// already-measured quantities (sub-Gaussian variance proxy, sample size,
// mutual information, divergences between train and test laws).

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace genbound {

struct BoundInputs {
  double sigma2 = 0.25;  // squared loss units
  int n = 1;
  double mi = 0.0;     // I(S'; A(S')), nats
  double gamma = 0.0;  // >= D(mu' || mu), nats
  std::optional<std::vector<double>> per_sample_mi;
  std::optional<double> d2_mismatch;  // Renyi-2 divergence D2(mu' || mu)
  std::optional<double> d2_joint;     // D2(P_{W'S'} || P_{W'} P_{S'})
  std::optional<double> eta;
  std::optional<double> delta;
  std::optional<double> alpha_sub;
  std::optional<std::vector<double>> betas;
  std::optional<double> eps_base;

  /// Throws std::invalid_argument when a field is outside its range.
  void validate() const;
};

struct BoundReport {
  std::string name;
  double value = 0.0;
  bool vacuous = false;
  std::vector<std::string> assumptions;
  BoundInputs inputs_echo;
};

/// sqrt(2 sigma^2 I / n): expected-gap bound without mismatch.
double xu_raginsky(double sigma2, int n, double mi);

/// sqrt(2 sigma^2 gamma + 2 sigma^2 I / n): the same bound with a KL mismatch budget.
double cor1_upper(double sigma2, int n, double mi, double gamma);

/// (1/n) sum_i sqrt(2 sigma^2 (I_i + gamma)) from per-sample mutual informations.
double per_sample_upper(double sigma2, const std::vector<double>& per_sample_mi, double gamma);

struct LambdaSearch {
  double value;
  double lambda;
};

/// Lower bound on inf E[d] for a generic rate-distortion problem:
///   sup_{-cap < lambda < 0} (rate + kl_shift + phi(lambda)) / lambda,
/// searched on 512 log-spaced |lambda| in [1e-4, cap] then refined by golden
/// section. Every evaluated lambda gives a valid bound.
LambdaSearch thm3_lower_search(double rate, double kl_shift, const std::function<double(double)>& log_mgf,
                               double lambda_cap = 50.0);
double thm3_lower(double rate, double kl_shift, const std::function<double(double)>& log_mgf,
                  double lambda_cap = 50.0);

/// Penalty inf_{lambda > 0} [lambda r + lambda (psi(1/(n lambda))^n - 1)].
LambdaSearch thm4_penalty(const std::function<double(double)>& psi, int n, double rate, double lambda_cap = 50.0);

/// d3_zero minus the penalty above. With the opposite sign the infimum would be -infinity.
double thm4_lower(double d3_zero, const std::function<double(double)>& psi, int n, double rate);

/// Penalty of the sub-Gaussian specialization at lambda = alpha / sqrt(2 n r).
double cor2_penalty(double alpha_sub, int n, double rate);
double cor2_lower(double d3_zero, double alpha_sub, int n, double rate);

struct TailBound {
  double value;  // in [0, 1]
  bool vacuous;  // clamped at 1
};

/// P[|gen| >= eta] <= 2 exp(-(n (eta^2/2 - sigma^2 D2(mu'||mu)) - sigma^2 D2(joint)) / (3 sigma^2)).
TailBound high_prob_tail_report(double sigma2, int n, double eta, double d2_mismatch, double d2_joint);
double high_prob_tail(double sigma2, int n, double eta, double d2_mismatch, double d2_joint);

/// Renyi orders (1 + (alpha-1) p, 1 + (alpha-1) q) used by the Holder split.
std::pair<double, double> lemma4_orders(double alpha, double p, double q);

/// D_{1+(a-1)p}(joint || P_W P_S') + n D_{1+(a-1)q}(mu' || mu), an upper bound
/// on D_alpha(joint || P_W mu^n). Throws when p, q are not Holder conjugate.
double lemma4_rhs(double alpha, double p, double q, double d_joint_order, double d_marg_order, int n);

/// Excess-risk bound of ERM; `coeff` multiplies ln(4/delta) in the second root.
double erm_excess_bound(double sigma2, int n, double delta, double d2_mismatch, double d2_joint,
                        double coeff = 3.0);

double misspec_g(double sigma2, double delta, double gamma);
double misspec_f(double sigma2, double delta, double gamma, const std::vector<double>& betas);

struct MisspecBounds {
  double bound_a;  // eps + sum beta + 2 sqrt(2 sigma^2 gamma)
  double bound_b;  // eps(delta/2) + f(delta)
  bool b_smaller;
};

MisspecBounds misspec_eps_bounds(double eps_base, double eps_base_half_delta, double sigma2, double gamma,
                                 const std::vector<double>& betas, double delta);

/// Named evaluation against a BoundInputs record (for reporting/CLI use).
BoundReport evaluate_bound(const std::string& name, const BoundInputs& in);

}  // namespace genbound
