#include "genbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace genbound {

namespace {

constexpr int kLambdaGrid = 512;
constexpr double kLambdaMin = 1e-4;

void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " must be >= 0");
}

void require_n(int n) {
  if (n < 1) throw std::invalid_argument("sample size n must be positive");
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

// Maximizes f over t in [lo, hi] on a log grid, then golden-section refines
// in log t around the best grid point. Non-finite evaluations are ignored.
LambdaSearch maximize_log_grid(const std::function<double(double)>& f, double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("invalid lambda search interval");
  const double a = std::log(lo), b = std::log(hi);
  std::vector<double> ts(kLambdaGrid), vals(kLambdaGrid);
  int best = -1;
  for (int i = 0; i < kLambdaGrid; ++i) {
    ts[i] = std::exp(a + (b - a) * i / (kLambdaGrid - 1));
    vals[i] = f(ts[i]);
    if (std::isfinite(vals[i]) && (best < 0 || vals[i] > vals[best])) best = i;
  }
  if (best < 0) throw std::domain_error("no lambda on the grid gives a finite bound");
  double x0 = std::log(ts[std::max(best - 1, 0)]);
  double x1 = std::log(ts[std::min(best + 1, kLambdaGrid - 1)]);
  LambdaSearch out{vals[best], ts[best]};
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = x1 - phi * (x1 - x0), d = x0 + phi * (x1 - x0);
  double fc = f(std::exp(c)), fd = f(std::exp(d));
  for (int it = 0; it < 200 && x1 - x0 > 1e-14; ++it) {
    if (!(fc < fd)) {  // keep the left part when fc >= fd (or fd is not finite)
      x1 = d;
      d = c;
      fd = fc;
      c = x1 - phi * (x1 - x0);
      fc = f(std::exp(c));
    } else {
      x0 = c;
      c = d;
      fc = fd;
      d = x0 + phi * (x1 - x0);
      fd = f(std::exp(d));
    }
    if (std::isfinite(fc) && fc > out.value) out = {fc, std::exp(c)};
    if (std::isfinite(fd) && fd > out.value) out = {fd, std::exp(d)};
  }
  return out;
}

}  // namespace

void BoundInputs::validate() const {
  require_nonneg(sigma2, "sigma2");
  require_n(n);
  require_nonneg(mi, "mi");
  require_nonneg(gamma, "gamma");
  if (per_sample_mi) {
    if (per_sample_mi->size() != static_cast<std::size_t>(n)) throw std::invalid_argument("per_sample_mi needs n entries");
    for (double v : *per_sample_mi) require_nonneg(v, "per_sample_mi");
  }
  if (d2_mismatch) require_nonneg(*d2_mismatch, "d2_mismatch");
  if (d2_joint) require_nonneg(*d2_joint, "d2_joint");
  if (eta) require_nonneg(*eta, "eta");
  if (delta) require_delta(*delta);
  if (alpha_sub) require_nonneg(*alpha_sub, "alpha_sub");
  if (betas) {
    if (betas->size() != static_cast<std::size_t>(n)) throw std::invalid_argument("betas needs n entries");
    for (double v : *betas) require_nonneg(v, "betas");
  }
}

double xu_raginsky(double sigma2, int n, double mi) {
  require_nonneg(sigma2, "sigma2");
  require_nonneg(mi, "mi");
  require_n(n);
  return std::sqrt(2.0 * sigma2 * mi / n);
}

double cor1_upper(double sigma2, int n, double mi, double gamma) {
  require_nonneg(sigma2, "sigma2");
  require_nonneg(mi, "mi");
  require_nonneg(gamma, "gamma");
  require_n(n);
  return std::sqrt(2.0 * sigma2 * gamma + 2.0 * sigma2 * mi / n);
}

double per_sample_upper(double sigma2, const std::vector<double>& per_sample_mi, double gamma) {
  if (per_sample_mi.empty()) throw std::invalid_argument("per_sample_upper needs at least one sample");
  require_nonneg(sigma2, "sigma2");
  require_nonneg(gamma, "gamma");
  double acc = 0.0;
  for (double i : per_sample_mi) {
    require_nonneg(i, "per-sample mutual information");
    acc += std::sqrt(2.0 * sigma2 * (i + gamma));
  }
  return acc / static_cast<double>(per_sample_mi.size());
}

LambdaSearch thm3_lower_search(double rate, double kl_shift, const std::function<double(double)>& log_mgf,
                               double lambda_cap) {
  require_nonneg(rate, "rate");
  require_nonneg(kl_shift, "kl_shift");
  if (!(lambda_cap > kLambdaMin)) throw std::invalid_argument("lambda_cap must exceed 1e-4");
  // t = -lambda > 0; the objective (r + D + phi(lambda)) / lambda becomes -(r + D + phi(-t)) / t.
  auto objective = [&](double t) { return -(rate + kl_shift + log_mgf(-t)) / t; };
  auto best = maximize_log_grid(objective, kLambdaMin, lambda_cap);
  best.lambda = -best.lambda;
  return best;
}

double thm3_lower(double rate, double kl_shift, const std::function<double(double)>& log_mgf, double lambda_cap) {
  return thm3_lower_search(rate, kl_shift, log_mgf, lambda_cap).value;
}

LambdaSearch thm4_penalty(const std::function<double(double)>& psi, int n, double rate, double lambda_cap) {
  require_nonneg(rate, "rate");
  require_n(n);
  auto neg_penalty = [&](double lambda) {
    const double ps = psi(1.0 / (n * lambda));
    if (!(ps >= 1.0)) {
      if (std::isnan(ps) || ps < 1.0 - 1e-12) throw std::domain_error("psi must be >= 1 on [0, inf)");
    }
    const double growth = std::expm1(n * std::log(std::max(ps, 1.0)));
    return -(lambda * rate + lambda * growth);
  };
  auto best = maximize_log_grid(neg_penalty, kLambdaMin, lambda_cap);
  return {-best.value, best.lambda};
}

double thm4_lower(double d3_zero, const std::function<double(double)>& psi, int n, double rate) {
  return d3_zero - thm4_penalty(psi, n, rate).value;
}

double cor2_penalty(double alpha_sub, int n, double rate) {
  require_nonneg(alpha_sub, "alpha_sub");
  require_n(n);
  if (!(rate > 0.0)) throw std::invalid_argument("cor2_lower requires rate > 0 (use thm4_lower at rate 0)");
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  return inv_sqrt_n * (alpha_sub * std::sqrt(rate) / std::sqrt(2.0) +
                       alpha_sub * std::expm1(rate) / std::sqrt(2.0 * rate));
}

double cor2_lower(double d3_zero, double alpha_sub, int n, double rate) {
  return d3_zero - cor2_penalty(alpha_sub, n, rate);
}

TailBound high_prob_tail_report(double sigma2, int n, double eta, double d2_mismatch, double d2_joint) {
  require_nonneg(sigma2, "sigma2");
  require_nonneg(eta, "eta");
  require_nonneg(d2_mismatch, "d2_mismatch");
  require_nonneg(d2_joint, "d2_joint");
  require_n(n);
  if (sigma2 == 0.0) return eta > 0.0 ? TailBound{0.0, false} : TailBound{1.0, true};
  const double exponent = (n * (0.5 * eta * eta - sigma2 * d2_mismatch) - sigma2 * d2_joint) / (3.0 * sigma2);
  const double v = 2.0 * std::exp(-exponent);
  if (!(v < 1.0)) return {1.0, true};
  return {std::max(v, 0.0), false};
}

double high_prob_tail(double sigma2, int n, double eta, double d2_mismatch, double d2_joint) {
  return high_prob_tail_report(sigma2, n, eta, d2_mismatch, d2_joint).value;
}

std::pair<double, double> lemma4_orders(double alpha, double p, double q) {
  if (!(alpha > 1.0 && p > 1.0 && q > 1.0)) throw std::invalid_argument("lemma4_orders requires alpha, p, q > 1");
  if (std::abs(1.0 / p + 1.0 / q - 1.0) > 1e-12) throw std::invalid_argument("p and q are not Holder conjugate");
  return {1.0 + (alpha - 1.0) * p, 1.0 + (alpha - 1.0) * q};
}

double lemma4_rhs(double alpha, double p, double q, double d_joint_order, double d_marg_order, int n) {
  lemma4_orders(alpha, p, q);
  require_n(n);
  return d_joint_order + n * d_marg_order;
}

double erm_excess_bound(double sigma2, int n, double delta, double d2_mismatch, double d2_joint, double coeff) {
  require_nonneg(sigma2, "sigma2");
  require_delta(delta);
  require_n(n);
  const double log_term = std::log(4.0 / delta);
  const double floor = 2.0 * sigma2 * d2_mismatch;
  return std::sqrt(floor + 2.0 * sigma2 * log_term / n) +
         std::sqrt(floor + 2.0 * sigma2 * (d2_joint + coeff * log_term) / n);
}

double misspec_g(double sigma2, double delta, double gamma) {
  require_delta(delta);
  require_nonneg(gamma, "gamma");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("misspec_g requires sigma2 > 0");
  return std::sqrt(2.0 * (std::log(1.0 / delta) + gamma) / sigma2);
}

double misspec_f(double sigma2, double delta, double gamma, const std::vector<double>& betas) {
  const double g = misspec_g(sigma2, 0.5 * delta, gamma);
  double stability = 0.0;
  for (double beta : betas) {
    require_nonneg(beta, "beta");
    stability += std::log1p(0.5 * std::expm1(g * beta) * std::sqrt(gamma));
  }
  return std::sqrt(2.0 * sigma2 * gamma) + std::sqrt(2.0 * sigma2 * (std::log(2.0 / delta) + gamma)) +
         stability / g;
}

MisspecBounds misspec_eps_bounds(double eps_base, double eps_base_half_delta, double sigma2, double gamma,
                                 const std::vector<double>& betas, double delta) {
  const double beta_sum = std::accumulate(betas.begin(), betas.end(), 0.0);
  MisspecBounds out;
  out.bound_a = eps_base + beta_sum + 2.0 * std::sqrt(2.0 * sigma2 * gamma);
  out.bound_b = eps_base_half_delta + misspec_f(sigma2, delta, gamma, betas);
  out.b_smaller = out.bound_b < out.bound_a;
  return out;
}

BoundReport evaluate_bound(const std::string& name, const BoundInputs& in) {
  in.validate();
  BoundReport rep{name, 0.0, false, {}, in};
  auto need = [&](const auto& opt, const char* field) {
    if (!opt) throw std::invalid_argument("bound '" + name + "' needs input '" + field + "'");
    return *opt;
  };
  if (name == "xu_raginsky") {
    rep.value = xu_raginsky(in.sigma2, in.n, in.mi);
    rep.assumptions = {"no mismatch", "sigma2-sub-Gaussian loss under mu"};
  } else if (name == "cor1_upper") {
    rep.value = cor1_upper(in.sigma2, in.n, in.mi, in.gamma);
    rep.assumptions = {"sigma2-sub-Gaussian loss under mu", "D(mu'||mu) <= gamma"};
  } else if (name == "per_sample_upper") {
    rep.value = per_sample_upper(in.sigma2, need(in.per_sample_mi, "per_sample_mi"), in.gamma);
    rep.assumptions = {"sigma2-sub-Gaussian loss under mu", "D(mu'||mu) <= gamma"};
  } else if (name == "high_prob_tail") {
    const auto t = high_prob_tail_report(in.sigma2, in.n, need(in.eta, "eta"), need(in.d2_mismatch, "d2_mismatch"),
                                         need(in.d2_joint, "d2_joint"));
    rep.value = t.value;
    rep.vacuous = t.vacuous;
    rep.assumptions = {"sigma2-sub-Gaussian loss under mu"};
  } else if (name == "erm_excess_bound") {
    rep.value = erm_excess_bound(in.sigma2, in.n, need(in.delta, "delta"), need(in.d2_mismatch, "d2_mismatch"),
                                 need(in.d2_joint, "d2_joint"));
    rep.assumptions = {"ERM learner", "holds with probability >= 1 - delta"};
  } else if (name == "misspec_bound_a" || name == "misspec_bound_b") {
    const auto& betas = need(in.betas, "betas");
    const double eps = need(in.eps_base, "eps_base");
    const auto m = misspec_eps_bounds(eps, eps, in.sigma2, in.gamma, betas, need(in.delta, "delta"));
    rep.value = name == "misspec_bound_a" ? m.bound_a : m.bound_b;
    rep.assumptions = {"uniformly stable learner", "eps_base used for both delta and delta/2"};
  } else {
    throw std::invalid_argument("unknown bound '" + name + "'");
  }
  return rep;
}

}  // namespace genbound
