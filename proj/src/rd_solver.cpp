#include "genbound/rd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "genbound/errors.hpp"

namespace genbound {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kLogFloor = 64.0 * std::numeric_limits<double>::epsilon();
constexpr int kBisectionSteps = 200;
constexpr int kWarmStartIterations = 100;

double log_sum_exp(const std::vector<double>& xs) {
  double hi = -kInfinity;
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

bool is_tie(double a, double best) { return a >= best - kTieTolerance * (1.0 + std::abs(best)); }

// Upper concave envelope of points sorted by rate (monotone chain).
std::vector<RDPoint> concave_envelope(std::vector<RDPoint> pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const RDPoint& a, const RDPoint& b) {
    return a.rate < b.rate || (a.rate == b.rate && a.value > b.value);
  });
  std::vector<RDPoint> hull;
  for (auto& p : pts) {
    if (!hull.empty() && p.rate == hull.back().rate) continue;
    // Values that do not improve on the envelope so far lie under it.
    if (!hull.empty() && p.value <= hull.back().value) continue;
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.rate - a.rate) * (p.value - a.value) - (b.value - a.value) * (p.rate - a.rate);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(std::move(p));
  }
  return hull;
}


struct PolishResult {
  bool converged;
  int iterations;
};

// Maximizes sum_x mu_x log(sum_w q_w a(x, w)) over the simplex, the dual of the
// tilted channel program in the output marginal q. Newton steps on the support
// of q, Frank-Wolfe steps to bring in hypotheses with c_w > 1, and a plain
// Blahut-Arimoto step whenever a Newton line search stalls.
PolishResult polish_output_marginal(const Matrix& a, std::span<const double> mu, std::vector<double>& q,
                                    double slope, double tol, int max_iter) {
  const std::size_t nx = a.rows(), nw = a.cols();
  std::vector<double> m(nx), c(nw), trial(nw), trial_m(nx);
  auto eval = [&](const std::vector<double>& qq, std::vector<double>& mm) {
    double phi = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      if (mu[x] == 0.0) continue;
      double acc = 0.0;
      for (std::size_t w = 0; w < nw; ++w) acc += qq[w] * a(x, w);
      mm[x] = acc;
      if (!(acc > 0.0)) return -kInfinity;
      phi += mu[x] * std::log(acc);
    }
    return phi;
  };
  auto ratios = [&] {
    for (std::size_t w = 0; w < nw; ++w) {
      double acc = 0.0;
      for (std::size_t x = 0; x < nx; ++x)
        if (mu[x] > 0.0) acc += mu[x] * a(x, w) / m[x];
      c[w] = acc;
    }
  };
  auto renormalize = [&](std::vector<double>& qq) {
    double total = 0.0;
    for (double& v : qq) {
      if (v < 0.0) v = 0.0;
      total += v;
    }
    for (double& v : qq) v /= total;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    double phi = eval(q, m);
    if (!std::isfinite(phi)) return {false, iter};
    ratios();
    const double gap = std::log(*std::max_element(c.begin(), c.end()));
    if (gap / slope <= tol || gap <= kLogFloor) return {true, iter};

    // Negligible hypotheses that the gradient pushes down leave the support;
    // the Frank-Wolfe step brings them back if they become profitable.
    const double top_q = *std::max_element(q.begin(), q.end());
    bool pruned = false;
    for (std::size_t w = 0; w < nw; ++w) {
      if (q[w] > 0.0 && q[w] < 1e-6 * top_q && c[w] < 1.0) {
        q[w] = 0.0;
        pruned = true;
      }
    }
    if (pruned) {
      renormalize(q);
      phi = eval(q, m);
      if (!std::isfinite(phi)) return {false, iter};
      ratios();
    }

    // The objective depends on q only through m, so at most (active inputs + 1)
    // hypotheses are needed; move along the kernel of [a; 1] until the support shrinks.
    std::vector<std::size_t> active_x;
    for (std::size_t x = 0; x < nx; ++x)
      if (mu[x] > 0.0) active_x.push_back(x);
    const std::size_t needed = active_x.size() + 1;
    std::vector<std::size_t> held;
    for (std::size_t w = 0; w < nw; ++w)
      if (q[w] > 0.0) held.push_back(w);
    if (held.size() > needed) {
      const auto rows_n = static_cast<Eigen::Index>(needed);
      while (held.size() > needed) {
        Eigen::MatrixXd basis(rows_n, rows_n + 1);
        for (Eigen::Index j = 0; j <= rows_n; ++j) {
          for (Eigen::Index i = 0; i + 1 < rows_n; ++i) {
            const std::size_t x = active_x[static_cast<std::size_t>(i)];
            basis(i, j) = a(x, held[static_cast<std::size_t>(j)]) / m[x];
          }
          basis(rows_n - 1, j) = 1.0;
        }
        Eigen::VectorXd dir = Eigen::FullPivLU<Eigen::MatrixXd>(basis).kernel().col(0);
        if (dir.minCoeff() >= 0.0) dir = -dir;
        double step = kInfinity;
        Eigen::Index leaving = 0;
        for (Eigen::Index j = 0; j <= rows_n; ++j) {
          if (dir(j) < 0.0 && q[held[static_cast<std::size_t>(j)]] / -dir(j) < step) {
            step = q[held[static_cast<std::size_t>(j)]] / -dir(j);
            leaving = j;
          }
        }
        if (!std::isfinite(step)) break;
        for (Eigen::Index j = 0; j <= rows_n; ++j) {
          double& v = q[held[static_cast<std::size_t>(j)]];
          v = std::max(0.0, v + step * dir(j));
        }
        q[held[static_cast<std::size_t>(leaving)]] = 0.0;
        held.erase(held.begin() + leaving);
      }
      renormalize(q);
      phi = eval(q, m);
      if (!std::isfinite(phi)) return {false, iter};
      ratios();
    }

    std::vector<std::size_t> support;
    double inner = 0.0, outer = 0.0;
    std::size_t entering = nw;
    for (std::size_t w = 0; w < nw; ++w) {
      if (q[w] > 0.0) {
        support.push_back(w);
        inner = std::max(inner, std::abs(c[w] - 1.0));
      } else if (c[w] - 1.0 > outer) {
        outer = c[w] - 1.0;
        entering = w;
      }
    }

    if (entering < nw && inner <= 0.5 * outer) {
      // Exact line search toward the vertex of the entering hypothesis.
      auto slope_at = [&](double g) {
        double d = 0.0;
        for (std::size_t x = 0; x < nx; ++x)
          if (mu[x] > 0.0) d += mu[x] * (a(x, entering) - m[x]) / ((1.0 - g) * m[x] + g * a(x, entering));
        return d;
      };
      double lo = 0.0, hi = 1.0;
      if (slope_at(1.0) >= 0.0) {
        lo = 1.0;
      } else {
        for (int k = 0; k < 100 && hi - lo > 1e-17; ++k) {
          const double mid = 0.5 * (lo + hi);
          (slope_at(mid) > 0.0 ? lo : hi) = mid;
        }
      }
      for (std::size_t w = 0; w < nw; ++w) q[w] *= 1.0 - lo;
      q[entering] += lo;
      renormalize(q);
      continue;
    }

    const auto k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    for (std::size_t x = 0; x < nx; ++x) {
      if (mu[x] == 0.0) continue;
      const double weight = mu[x] / (m[x] * m[x]);
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) kkt(i, j) += weight * a(x, support[i]) * a(x, support[j]);
    }
    const double ridge = 1e-13 * kkt.topLeftCorner(k, k).trace() / static_cast<double>(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      kkt(i, i) += ridge;
      kkt(i, k) = kkt(k, i) = 1.0;
      rhs(i) = c[support[i]];
    }
    const Eigen::VectorXd sol = kkt.colPivHouseholderQr().solve(rhs);
    double ascent = 0.0, t_max = kInfinity;
    for (Eigen::Index i = 0; i < k; ++i) {
      ascent += c[support[i]] * sol(i);
      if (sol(i) < 0.0) t_max = std::min(t_max, q[support[i]] / -sol(i));
    }
    bool moved = false;
    if (std::isfinite(ascent) && ascent > 0.0 && ascent <= 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(phi))) {
      // The objective no longer resolves the step; judge it by the optimality gap.
      trial = q;
      const double t = std::min(1.0, 0.99 * t_max);
      for (Eigen::Index i = 0; i < k; ++i) trial[support[i]] += t * sol(i);
      renormalize(trial);
      if (std::isfinite(eval(trial, trial_m))) {
        double worst = 0.0;
        for (std::size_t w = 0; w < nw; ++w) {
          double acc = 0.0;
          for (std::size_t x = 0; x < nx; ++x)
            if (mu[x] > 0.0) acc += mu[x] * a(x, w) / trial_m[x];
          worst = std::max(worst, acc);
        }
        if (std::log(worst) < gap) {
          q = trial;
          moved = true;
        }
      }
    }
    if (!moved && std::isfinite(ascent) && ascent > 0.0 && t_max < 1.0) {
      // Full step with the overshooting coordinates clipped to zero.
      trial = q;
      for (Eigen::Index i = 0; i < k; ++i) trial[support[i]] += sol(i);
      renormalize(trial);
      if (eval(trial, trial_m) > phi) {
        q = trial;
        moved = true;
      }
    }
    if (!moved && std::isfinite(ascent) && ascent > 0.0) {
      double t = std::min(1.0, t_max);
      for (int k2 = 0; k2 < 60 && t > 1e-20; ++k2, t *= 0.5) {
        trial = q;
        for (Eigen::Index i = 0; i < k; ++i) trial[support[i]] += t * sol(i);
        if (t == t_max) {
          for (Eigen::Index i = 0; i < k; ++i)
            if (sol(i) < 0.0 && q[support[i]] / -sol(i) <= t_max) trial[support[i]] = 0.0;
        }
        renormalize(trial);
        const double next = eval(trial, trial_m);
        if ((next >= phi + 1e-4 * t * ascent && next > phi) || (next > phi && t == t_max)) {
          q = trial;
          moved = true;
          break;
        }
      }
    }
    if (!moved) {
      // Multiplicative update: never decreases the objective.
      for (std::size_t w = 0; w < nw; ++w) q[w] *= c[w];
      renormalize(q);
    }
  }
  return {false, max_iter};
}

}  // namespace

double RDCurve::value_at(double rate) const {
  if (points.empty()) throw std::logic_error("empty RD curve");
  if (rate <= points.front().rate) return points.front().value;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (rate <= points[i].rate) {
      const auto& a = points[i - 1];
      const auto& b = points[i];
      const double theta = (rate - a.rate) / (b.rate - a.rate);
      return a.value + theta * (b.value - a.value);
    }
  }
  return points.back().value;
}

std::vector<double> slope_grid(const SweepOptions& sweep) {
  std::vector<double> slopes{0.0};
  const double lo = std::log(sweep.min_slope), hi = std::log(sweep.max_slope);
  for (int i = 0; i < sweep.grid_slopes; ++i) {
    const double t = sweep.grid_slopes == 1 ? 0.0 : static_cast<double>(i) / (sweep.grid_slopes - 1);
    slopes.push_back(std::exp(lo + t * (hi - lo)));
  }
  return slopes;
}

TiltedChannelProblem::TiltedChannelProblem(FiniteDistribution input, Matrix gain, std::optional<Matrix> aux,
                                           double aux_weight, BaOptions options)
    : input_(std::move(input)),
      gain_(std::move(gain)),
      aux_(std::move(aux)),
      aux_weight_(aux_weight),
      options_(options) {
  if (gain_.cols() != input_.size()) throw DimensionError("gain columns must match the input alphabet");
  if (aux_ && (aux_->rows() != gain_.rows() || aux_->cols() != gain_.cols())) {
    throw DimensionError("auxiliary matrix must match the gain shape");
  }
  if (aux_weight_ != 0.0 && !aux_) throw std::invalid_argument("aux weight given without an auxiliary matrix");
}

double TiltedChannelProblem::objective(std::size_t w, std::size_t x) const {
  return aux_weight_ == 0.0 ? gain_(w, x) : gain_(w, x) + aux_weight_ * (*aux_)(w, x);
}

RDPoint TiltedChannelProblem::evaluate(Channel channel, double slope) const {
  RDPoint p;
  p.slope = slope;
  p.rate = mutual_information(input_, channel.cond);
  double value = 0.0, aux = 0.0;
  for (std::size_t x = 0; x < input_.size(); ++x) {
    if (input_[x] == 0.0) continue;
    for (std::size_t w = 0; w < gain_.rows(); ++w) {
      const double m = input_[x] * channel.cond(x, w);
      value += m * gain_(w, x);
      if (aux_) aux += m * (*aux_)(w, x);
    }
  }
  p.value = value;
  if (aux_) p.aux_expectation = aux;
  p.channel = std::move(channel);
  return p;
}

RDPoint TiltedChannelProblem::solve_slope(double slope) const {
  if (!(slope >= 0.0)) throw std::invalid_argument("slope must be nonnegative");
  if (std::isinf(slope)) return saturation();
  const std::size_t nw = gain_.rows(), nx = input_.size();

  if (slope == 0.0) {
    // Rate 0: every row is the same mixture; split mass uniformly over the best hypotheses.
    std::vector<double> score(nw, 0.0);
    for (std::size_t w = 0; w < nw; ++w)
      for (std::size_t x = 0; x < nx; ++x) score[w] += input_[x] * objective(w, x);
    const double best = *std::max_element(score.begin(), score.end());
    std::vector<double> q(nw, 0.0);
    for (std::size_t w = 0; w < nw; ++w)
      if (is_tie(score[w], best)) q[w] = 1.0;
    const auto law = FiniteDistribution::from_weights(q);
    Matrix cond(nx, nw);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t w = 0; w < nw; ++w) cond(x, w) = law[w];
    return evaluate(Channel{std::move(cond)}, 0.0);
  }

  // Objective shifted so each input's best hypothesis scores 0; keeps
  // slope * objective small where it matters at large slopes.
  Matrix shifted(nx, nw);
  for (std::size_t x = 0; x < nx; ++x) {
    double top = -kInfinity;
    for (std::size_t w = 0; w < nw; ++w) top = std::max(top, objective(w, x));
    for (std::size_t w = 0; w < nw; ++w) shifted(x, w) = objective(w, x) - top;
  }
  std::vector<double> log_q(nw, -std::log(static_cast<double>(nw)));
  std::vector<double> log_z(nx, 0.0), scratch(nw), next_q(nw);
  Matrix cond(nx, nw);
  bool converged = false;
  int iter = 0;
  const int warm = std::min(options_.max_iter, kWarmStartIterations);
  for (; iter < warm; ++iter) {
    std::fill(next_q.begin(), next_q.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t w = 0; w < nw; ++w) scratch[w] = log_q[w] + slope * shifted(x, w);
      log_z[x] = log_sum_exp(scratch);
      for (std::size_t w = 0; w < nw; ++w) {
        cond(x, w) = std::exp(scratch[w] - log_z[x]);
        next_q[w] += input_[x] * cond(x, w);
      }
    }
    // log c_w = log(next_q_w / q_w) measures how far q is from a fixed point;
    // (1/slope) * max_w log c_w bounds the Lagrangian suboptimality.
    double max_log_c = -kInfinity;
    for (std::size_t w = 0; w < nw; ++w) {
      double log_c;
      if (next_q[w] > 1e-280) {
        log_c = std::log(next_q[w]) - log_q[w];
      } else {
        std::vector<double> terms;
        for (std::size_t x = 0; x < nx; ++x)
          if (input_[x] > 0.0) terms.push_back(std::log(input_[x]) + slope * shifted(x, w) - log_z[x]);
        log_c = log_sum_exp(terms);
      }
      max_log_c = std::max(max_log_c, log_c);
      log_q[w] += log_c;
    }
    const double norm = log_sum_exp(log_q);
    for (double& lq : log_q) lq -= norm;
    if (max_log_c / slope <= options_.tol || max_log_c <= kLogFloor) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged && iter < options_.max_iter) {
    Matrix a(nx, nw);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t w = 0; w < nw; ++w) a(x, w) = std::exp(slope * shifted(x, w));
    std::vector<double> q(nw);
    for (std::size_t w = 0; w < nw; ++w) q[w] = std::exp(log_q[w]);
    const auto polished = polish_output_marginal(a, input_.probs(), q, slope, options_.tol, options_.max_iter - iter);
    converged = polished.converged;
    iter += polished.iterations;
    if (polished.converged || polished.iterations > 0)
      for (std::size_t w = 0; w < nw; ++w) log_q[w] = q[w] > 0.0 ? std::log(q[w]) : -kInfinity;
  }
  // Channel matching the final output marginal.
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t w = 0; w < nw; ++w) scratch[w] = log_q[w] + slope * shifted(x, w);
    const double lz = log_sum_exp(scratch);
    for (std::size_t w = 0; w < nw; ++w) cond(x, w) = std::exp(scratch[w] - lz);
  }
  auto p = evaluate(Channel{std::move(cond)}, slope);
  p.converged = converged;
  p.iterations = iter;
  return p;
}

RDPoint TiltedChannelProblem::saturation() const {
  const std::size_t nw = gain_.rows(), nx = input_.size();
  // Pointwise maximizers; among channels supported on them, the rate is
  // minimized by alternating the output marginal and the restricted channel.
  std::vector<std::vector<std::size_t>> best(nx);
  std::vector<double> q(nw, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    double top = -kInfinity;
    for (std::size_t w = 0; w < nw; ++w) top = std::max(top, objective(w, x));
    for (std::size_t w = 0; w < nw; ++w)
      if (is_tie(objective(w, x), top)) best[x].push_back(w);
    if (input_[x] > 0.0)
      for (auto w : best[x]) q[w] = 1.0;
  }
  double total = 0.0;
  for (double v : q) total += v;
  for (double& v : q) v /= total;

  Matrix cond(nx, nw);
  auto fill_channel = [&] {
    for (std::size_t x = 0; x < nx; ++x) {
      double mass = 0.0;
      for (auto w : best[x]) mass += q[w];
      for (std::size_t w = 0; w < nw; ++w) cond(x, w) = 0.0;
      for (auto w : best[x]) cond(x, w) = mass > 0.0 ? q[w] / mass : 1.0 / best[x].size();
    }
  };
  bool converged = false;
  int iter = 0;
  for (; iter < options_.max_iter; ++iter) {
    fill_channel();
    std::vector<double> next(nw, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (auto w : best[x]) next[w] += input_[x] * cond(x, w);
    double delta = 0.0;
    for (std::size_t w = 0; w < nw; ++w) delta = std::max(delta, std::abs(next[w] - q[w]));
    q = std::move(next);
    if (delta <= 1e-15) {
      converged = true;
      ++iter;
      break;
    }
  }
  fill_channel();
  auto p = evaluate(Channel{std::move(cond)}, kInfinity);
  p.converged = converged;
  p.iterations = iter;
  return p;
}

RDPoint TiltedChannelProblem::mix(const RDPoint& lo, const RDPoint& hi, double theta) const {
  if (theta <= 0.0) return lo;
  if (theta >= 1.0) return hi;
  Matrix cond(lo.channel.cond.rows(), lo.channel.cond.cols());
  for (std::size_t i = 0; i < cond.data().size(); ++i)
    cond.data()[i] = (1.0 - theta) * lo.channel.cond.data()[i] + theta * hi.channel.cond.data()[i];
  // Time sharing keeps the value linear; the mixed channel's rate is at most the chord.
  auto p = evaluate(Channel{std::move(cond)}, lo.slope + theta * (hi.slope - lo.slope));
  p.converged = lo.converged && hi.converged;
  p.iterations = lo.iterations + hi.iterations;
  return p;
}

RDPoint TiltedChannelProblem::at_rate(double rate) const {
  if (!(rate >= 0.0)) throw std::invalid_argument("target rate must be nonnegative");
  auto sat = saturation();
  if (rate >= sat.rate) return sat;
  auto zero = solve_slope(0.0);
  if (rate <= zero.rate) return zero;

  // Bracket on the geometric slope grid by binary search (rate grows with slope).
  const SweepOptions sweep;
  const auto grid = slope_grid(sweep);
  RDPoint lo = zero;
  std::optional<RDPoint> hi;
  std::size_t a = 1, b = grid.size();  // search in [a, b)
  while (a < b) {
    const std::size_t mid = (a + b) / 2;
    auto p = solve_slope(grid[mid]);
    if (p.rate <= rate) {
      lo = std::move(p);
      a = mid + 1;
    } else {
      hi = std::move(p);
      b = mid;
    }
  }
  if (!hi) {
    // Beyond the grid: grow the slope until the rate passes the target.
    double slope = grid.back();
    for (int k = 0; k < 40 && !hi; ++k) {
      slope *= 4.0;
      auto p = solve_slope(slope);
      if (p.rate <= rate) {
        lo = std::move(p);
      } else {
        hi = std::move(p);
      }
    }
    if (!hi) hi = sat;
  }
  if (lo.slope == 0.0 && std::isfinite(hi->slope)) {
    // Shrink toward zero slope so the bracket can be bisected geometrically.
    double slope = hi->slope;
    for (int k = 0; k < 80; ++k) {
      slope *= 0.5;
      auto p = solve_slope(slope);
      if (p.rate <= rate) {
        lo = std::move(p);
        break;
      }
      hi = std::move(p);
    }
  }
  if (lo.slope > 0.0 && std::isfinite(hi->slope)) {
    for (int k = 0; k < kBisectionSteps; ++k) {
      if (hi->rate - lo.rate <= 1e-13 || hi->slope / lo.slope - 1.0 <= 1e-13) break;
      auto p = solve_slope(std::sqrt(lo.slope * hi->slope));
      if (p.rate <= rate) {
        lo = std::move(p);
      } else {
        hi = std::move(p);
      }
    }
  }
  const double span = hi->rate - lo.rate;
  const double theta = span > 0.0 ? std::clamp((rate - lo.rate) / span, 0.0, 1.0) : 0.0;
  return mix(lo, *hi, theta);
}

RDCurve TiltedChannelProblem::trace(const SweepOptions& sweep) const {
  std::vector<RDPoint> pts;
  for (double slope : slope_grid(sweep)) pts.push_back(solve_slope(slope));
  for (int round = 0; round < sweep.max_refinements; ++round) {
    std::vector<RDPoint> added;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto& a = pts[i - 1];
      const auto& b = pts[i];
      if (std::abs(b.rate - a.rate) <= sweep.max_rate_jump) continue;
      const double mid = a.slope == 0.0 ? 0.5 * b.slope : std::sqrt(a.slope * b.slope);
      added.push_back(solve_slope(mid));
    }
    if (added.empty()) break;
    pts.insert(pts.end(), std::make_move_iterator(added.begin()), std::make_move_iterator(added.end()));
    std::stable_sort(pts.begin(), pts.end(), [](const RDPoint& x, const RDPoint& y) { return x.slope < y.slope; });
  }
  pts.push_back(saturation());
  RDCurve curve;
  for (const auto& p : pts) curve.converged = curve.converged && p.converged;
  curve.points = concave_envelope(std::move(pts));
  return curve;
}

TiltedChannelProblem d2_problem(const Scenario& s, const BaOptions& options) {
  s.validate();
  auto gap = gap_matrix(s);
  std::optional<Matrix> aux;
  if (s.aux_loss) aux = s.aux_loss->values();
  return TiltedChannelProblem(s.train_dist, gap.values(), std::move(aux), 0.0, options);
}

RDPoint ba_fixed_slope(const Scenario& s, double slope, double tol, int max_iter) {
  return d2_problem(s, BaOptions{tol, max_iter}).solve_slope(slope);
}

RDPoint d2_point(const Scenario& s, double rate) { return d2_problem(s).at_rate(rate); }

double d2_at(const Scenario& s, double rate) { return d2_point(s, rate).value; }

RDCurve d2_curve(const Scenario& s, const SweepOptions& sweep) { return d2_problem(s).trace(sweep); }

ConstrainedResult d2_constrained(const Scenario& s, double rate, double v_n) {
  s.validate();
  if (!s.aux_loss) throw std::invalid_argument("d2_constrained_at requires an auxiliary loss");
  const auto gap = gap_matrix(s);
  constexpr double kResidualTol = 1e-8;
  auto solve = [&](double weight) {
    return TiltedChannelProblem(s.train_dist, gap.values(), s.aux_loss->values(), weight).at_rate(rate);
  };
  auto feasible = [&](const RDPoint& p) { return *p.aux_expectation >= v_n - kResidualTol; };

  auto lo = solve(0.0);
  if (feasible(lo)) return {std::move(lo), 0.0, false};

  double lo_w = 0.0, hi_w = 1.0;
  auto hi = solve(hi_w);
  for (int k = 0; k < 60 && !feasible(hi); ++k) {
    lo_w = hi_w;
    lo = std::move(hi);
    hi_w *= 2.0;
    hi = solve(hi_w);
  }
  if (!feasible(hi)) {
    throw Infeasible("no channel with rate <= " + std::to_string(rate) + " reaches E[aux] >= " +
                     std::to_string(v_n) + " (best " + std::to_string(*hi.aux_expectation) + ")");
  }
  for (int k = 0; k < kBisectionSteps; ++k) {
    if (*hi.aux_expectation - v_n <= kResidualTol || hi_w - lo_w <= 1e-15 * hi_w) break;
    const double mid = 0.5 * (lo_w + hi_w);
    auto p = solve(mid);
    if (feasible(p)) {
      hi = std::move(p);
      hi_w = mid;
    } else {
      lo = std::move(p);
      lo_w = mid;
    }
  }
  // At a jump in E[aux] the optimum time-shares the two sides of the multiplier.
  RDPoint result = hi;
  const double a_lo = *lo.aux_expectation, a_hi = *hi.aux_expectation;
  if (a_hi > v_n && a_hi - a_lo > 0.0 && a_lo < v_n) {
    const double theta = (v_n - a_lo) / (a_hi - a_lo);
    Matrix cond(lo.channel.cond.rows(), lo.channel.cond.cols());
    for (std::size_t i = 0; i < cond.data().size(); ++i)
      cond.data()[i] = (1.0 - theta) * lo.channel.cond.data()[i] + theta * hi.channel.cond.data()[i];
    auto mixed = TiltedChannelProblem(s.train_dist, gap.values(), s.aux_loss->values(), hi_w)
                     .evaluate(Channel{std::move(cond)}, hi.slope);
    if (mixed.rate <= rate + 1e-12 && mixed.value > result.value) {
      mixed.converged = lo.converged && hi.converged;
      result = std::move(mixed);
    }
  }
  return {std::move(result), hi_w, true};
}

double d2_constrained_at(const Scenario& s, double rate, double v_n) {
  return d2_constrained(s, rate, v_n).point.value;
}

double d1_exact_tiny(const Scenario& s, double rate) {
  s.validate();
  const std::size_t nz = s.instances(), nw = s.hypotheses();
  double count = 1.0;
  for (int i = 0; i < s.n; ++i) count *= static_cast<double>(nz);
  if (count > 4096.0) {
    throw CapExceeded("d1_exact_tiny: |Z|^n = " + std::to_string(count) + " exceeds 4096");
  }
  const auto seqs = static_cast<std::size_t>(count);
  const auto test_risk = population_risk(s.loss, s.test_dist);
  std::vector<double> law(seqs, 1.0);
  Matrix gain(nw, seqs);
  for (std::size_t idx = 0; idx < seqs; ++idx) {
    std::size_t rest = idx;
    std::vector<double> emp(nw, 0.0);
    for (int i = 0; i < s.n; ++i) {
      const std::size_t z = rest % nz;
      rest /= nz;
      law[idx] *= s.train_dist[z];
      for (std::size_t w = 0; w < nw; ++w) emp[w] += s.loss(w, z);
    }
    for (std::size_t w = 0; w < nw; ++w) gain(w, idx) = test_risk[w] - emp[w] / s.n;
  }
  TiltedChannelProblem problem(FiniteDistribution::from_weights(law), std::move(gain));
  return problem.at_rate(rate).value;
}

namespace {

// All compositions of `total` into `parts` nonnegative integers.
void compositions(int total, std::size_t parts, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    current.push_back(k);
    compositions(total - k, parts - 1, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<double> brute_force_d2(const Scenario& s, const std::vector<double>& rates, double grid_step) {
  s.validate();
  const std::size_t nw = s.hypotheses(), nz = s.instances();
  if (nw * nz > 12) throw CapExceeded("brute_force_d2: |W|*|Z| exceeds 12");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw std::invalid_argument("grid_step must lie in (0,1]");
  const int steps = static_cast<int>(std::lround(1.0 / grid_step));
  if (std::abs(steps * grid_step - 1.0) > 1e-9) throw std::invalid_argument("1/grid_step must be an integer");

  std::vector<std::vector<int>> rows;
  std::vector<int> scratch;
  compositions(steps, nw, scratch, rows);
  double combos = 1.0;
  for (std::size_t z = 0; z < nz; ++z) combos *= static_cast<double>(rows.size());
  if (combos > 5e7) throw CapExceeded("brute_force_d2: channel grid too large");

  const auto gap = gap_matrix(s);
  const auto& mu = s.train_dist;
  // Per-row gain contributions are precomputed; MI needs the full channel.
  std::vector<std::vector<double>> row_gain(nz, std::vector<double>(rows.size(), 0.0));
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t k = 0; k < rows.size(); ++k)
      for (std::size_t w = 0; w < nw; ++w) row_gain[z][k] += mu[z] * rows[k][w] / steps * gap(w, z);

  std::vector<double> best(rates.size(), -kInfinity);
  std::vector<std::size_t> pick(nz, 0);
  std::vector<double> out(nw);
  const auto total = static_cast<std::size_t>(combos);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rest = c;
    double value = 0.0;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t z = 0; z < nz; ++z) {
      pick[z] = rest % rows.size();
      rest /= rows.size();
      value += row_gain[z][pick[z]];
      for (std::size_t w = 0; w < nw; ++w) out[w] += mu[z] * rows[pick[z]][w] / steps;
    }
    double mi = 0.0;
    for (std::size_t z = 0; z < nz; ++z) {
      if (mu[z] == 0.0) continue;
      for (std::size_t w = 0; w < nw; ++w) {
        const double p = static_cast<double>(rows[pick[z]][w]) / steps;
        if (p > 0.0) mi += mu[z] * p * std::log(p / out[w]);
      }
    }
    for (std::size_t i = 0; i < rates.size(); ++i)
      if (mi <= rates[i] + 1e-12 && value > best[i]) best[i] = value;
  }
  return best;
}

double brute_force_d2(const Scenario& s, double rate, double grid_step) {
  return brute_force_d2(s, std::vector<double>{rate}, grid_step).front();
}

}  // namespace genbound
