#include "genbound/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "genbound/errors.hpp"

namespace genbound {

namespace {

void require_same_size(const FiniteDistribution& p, const FiniteDistribution& q, const char* op) {
  if (p.size() != q.size()) {
    throw DimensionError(std::string(op) + ": alphabet sizes differ (" + std::to_string(p.size()) +
                         " vs " + std::to_string(q.size()) + ")");
  }
}

double log_sum_exp(std::span<const double> xs) {
  double hi = -kInfinity;
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("distribution over an empty alphabet");
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument("distribution masses must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("distribution masses sum to " + std::to_string(total) +
                                ", not 1");
  }
  for (double& p : probs_) p /= total;
}

FiniteDistribution FiniteDistribution::from_weights(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights have zero total mass");
  std::vector<double> probs(weights.begin(), weights.end());
  for (double& p : probs) p /= total;
  return FiniteDistribution(std::move(probs), Unchecked{});
}

FiniteDistribution FiniteDistribution::uniform(std::size_t size) {
  if (size == 0) throw std::invalid_argument("uniform distribution over an empty alphabet");
  return FiniteDistribution(std::vector<double>(size, 1.0 / static_cast<double>(size)), Unchecked{});
}

FiniteDistribution FiniteDistribution::point_mass(std::size_t size, std::size_t index) {
  if (index >= size) throw std::out_of_range("point mass index outside alphabet");
  std::vector<double> probs(size, 0.0);
  probs[index] = 1.0;
  return FiniteDistribution(std::move(probs), Unchecked{});
}

FiniteDistribution FiniteDistribution::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Bernoulli parameter outside [0,1]");
  return FiniteDistribution({1.0 - p, p}, Unchecked{});
}

JointTable::JointTable(Matrix mass) : mass_(std::move(mass)) {
  if (mass_.empty()) throw std::invalid_argument("joint table is empty");
  double total = 0.0;
  for (double m : mass_.data()) {
    if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("joint masses must be finite and >= 0");
    total += m;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("joint masses sum to " + std::to_string(total) + ", not 1");
  }
  for (double& m : mass_.data()) m /= total;
}

JointTable JointTable::from_channel(const FiniteDistribution& input, const Matrix& channel) {
  if (channel.rows() != input.size()) {
    throw DimensionError("channel rows must match the input alphabet");
  }
  Matrix mass(channel.rows(), channel.cols());
  for (std::size_t x = 0; x < channel.rows(); ++x)
    for (std::size_t y = 0; y < channel.cols(); ++y) mass(x, y) = input[x] * channel(x, y);
  return JointTable(std::move(mass));
}

JointTable JointTable::product(const FiniteDistribution& rows, const FiniteDistribution& cols) {
  Matrix mass(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) mass(r, c) = rows[r] * cols[c];
  return JointTable(std::move(mass));
}

FiniteDistribution JointTable::row_marginal() const {
  return FiniteDistribution::from_weights(mass_.row_sums());
}

FiniteDistribution JointTable::col_marginal() const {
  return FiniteDistribution::from_weights(mass_.col_sums());
}

JointTable JointTable::product_of_marginals() const {
  return product(row_marginal(), col_marginal());
}

FiniteDistribution JointTable::flatten() const { return FiniteDistribution::from_weights(mass_.data()); }

double entropy(const FiniteDistribution& p) {
  double h = 0.0;
  for (double x : p.probs())
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q) {
  require_same_size(p, q, "kl_divergence");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInfinity;
    d += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

double renyi_divergence(const FiniteDistribution& p, const FiniteDistribution& q, double alpha) {
  require_same_size(p, q, "renyi_divergence");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("renyi_divergence requires a finite order alpha > 1");
  }
  std::vector<double> terms;
  terms.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInfinity;
    terms.push_back(alpha * std::log(p[i]) + (1.0 - alpha) * std::log(q[i]));
  }
  return std::max(log_sum_exp(terms) / (alpha - 1.0), 0.0);
}

double chi_squared(const FiniteDistribution& p, const FiniteDistribution& q) {
  require_same_size(p, q, "chi_squared");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) {
      if (p[i] > 0.0) return kInfinity;
      continue;
    }
    const double diff = p[i] - q[i];
    d += diff * diff / q[i];
  }
  return d;
}

double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q) {
  require_same_size(p, q, "tv_distance");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return std::min(0.5 * d, 1.0);
}

double mutual_information(const JointTable& joint) {
  const auto rows = joint.mass().row_sums();
  const auto cols = joint.mass().col_sums();
  double mi = 0.0;
  for (std::size_t r = 0; r < joint.rows(); ++r) {
    for (std::size_t c = 0; c < joint.cols(); ++c) {
      const double m = joint.mass()(r, c);
      if (m > 0.0) mi += m * std::log(m / (rows[r] * cols[c]));
    }
  }
  return std::max(mi, 0.0);
}

double mutual_information(const FiniteDistribution& input, const Matrix& channel) {
  if (channel.rows() != input.size()) throw DimensionError("channel rows must match the input alphabet");
  std::vector<double> out(channel.cols(), 0.0);
  for (std::size_t x = 0; x < channel.rows(); ++x)
    for (std::size_t y = 0; y < channel.cols(); ++y) out[y] += input[x] * channel(x, y);
  double mi = 0.0;
  for (std::size_t x = 0; x < channel.rows(); ++x) {
    if (input[x] == 0.0) continue;
    for (std::size_t y = 0; y < channel.cols(); ++y) {
      const double p = channel(x, y);
      const double m = input[x] * p;
      // Denormal entries can underflow to zero mass; they carry no information.
      if (m > 0.0 && out[y] > 0.0) mi += m * std::log(p / out[y]);
    }
  }
  return std::max(mi, 0.0);
}

double hoeffding_sigma(double loss_min, double loss_max) {
  if (!std::isfinite(loss_min) || !std::isfinite(loss_max) || loss_min > loss_max) {
    throw std::invalid_argument("hoeffding_sigma requires a finite range with min <= max");
  }
  return 0.5 * (loss_max - loss_min);
}

}  // namespace genbound
