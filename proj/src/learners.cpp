#include "genbound/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "genbound/errors.hpp"

namespace genbound {

namespace {

constexpr double kTieTolerance = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t sample_symbol(const FiniteDistribution& law, double u) {
  double acc = 0.0;
  for (std::size_t z = 0; z < law.size(); ++z) {
    acc += law[z];
    if (u < acc) return z;
  }
  // Rounding left u above the total; fall back to the last atom with mass.
  for (std::size_t z = law.size(); z-- > 0;)
    if (law[z] > 0.0) return z;
  return 0;
}

const LossMatrix& require_aux(const Scenario& s) {
  if (!s.aux_loss) throw std::invalid_argument("scenario has no auxiliary loss");
  return *s.aux_loss;
}

void count_vectors(int total, std::size_t parts, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    current.push_back(k);
    count_vectors(total - k, parts - 1, current, out);
    current.pop_back();
  }
}

}  // namespace

void LearnerSpec::validate(std::size_t hypotheses) const {
  switch (kind) {
    case LearnerKind::Gibbs:
      if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("Gibbs beta must be finite and >= 0");
      break;
    case LearnerKind::Constant:
      if (constant_index >= hypotheses) throw std::invalid_argument("constant learner index out of range");
      break;
    case LearnerKind::Erm:
      break;
  }
}

std::string LearnerSpec::describe() const {
  switch (kind) {
    case LearnerKind::Gibbs: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "gibbs(beta=%.12g)", beta);
      return buf;
    }
    case LearnerKind::Constant:
      return "constant(" + std::to_string(constant_index) + ")";
    case LearnerKind::Erm:
      break;
  }
  return "erm(tie=lowest)";
}

ExactJoint::ExactJoint(Matrix table, Matrix empirical_risk, std::vector<double> dataset_law,
                       std::vector<double> test_risk, std::size_t instances, int n)
    : table_(std::move(table)),
      empirical_risk_(std::move(empirical_risk)),
      dataset_law_(std::move(dataset_law)),
      test_risk_(std::move(test_risk)),
      instances_(instances),
      n_(n) {
  if (empirical_risk_.rows() != table_.rows() || empirical_risk_.cols() != table_.cols() ||
      dataset_law_.size() != table_.rows() || test_risk_.size() != table_.cols()) {
    throw DimensionError("inconsistent exact joint components");
  }
  if (std::abs(table_.sum() - 1.0) > kNormalizationTolerance) throw std::invalid_argument("joint mass is not 1");
}

std::size_t ExactJoint::sample(std::size_t dataset, int i) const {
  if (i < 0 || i >= n_) throw std::out_of_range("sample index out of range");
  for (int k = 0; k < i; ++k) dataset /= instances_;
  return dataset % instances_;
}

FiniteDistribution ExactJoint::output_law() const { return FiniteDistribution::from_weights(table_.col_sums()); }

ExactJoint enumerate_joint(const Scenario& s, const LearnerSpec& learner) {
  s.validate();
  learner.validate(s.hypotheses());
  const std::size_t nz = s.instances(), nw = s.hypotheses();
  double count = 1.0;
  for (int i = 0; i < s.n; ++i) count *= static_cast<double>(nz);
  if (count * static_cast<double>(nw) > kEnumerationCap) {
    throw CapExceeded("enumerate_joint: |Z|^n * |W| = " + std::to_string(count * nw) + " exceeds 1e6");
  }
  const auto datasets = static_cast<std::size_t>(count);
  const auto test_risk = population_risk(s.loss, s.test_dist);

  Matrix table(datasets, nw), emp(datasets, nw);
  std::vector<double> law(datasets), kernel(nw);
  for (std::size_t d = 0; d < datasets; ++d) {
    std::size_t rest = d;
    double p = 1.0;
    for (int i = 0; i < s.n; ++i) {
      const std::size_t z = rest % nz;
      rest /= nz;
      p *= s.train_dist[z];
      for (std::size_t w = 0; w < nw; ++w) emp(d, w) += s.loss(w, z);
    }
    for (std::size_t w = 0; w < nw; ++w) emp(d, w) /= s.n;
    law[d] = p;

    std::fill(kernel.begin(), kernel.end(), 0.0);
    switch (learner.kind) {
      case LearnerKind::Constant:
        kernel[learner.constant_index] = 1.0;
        break;
      case LearnerKind::Erm: {
        double best = emp(d, 0);
        for (std::size_t w = 1; w < nw; ++w) best = std::min(best, emp(d, w));
        for (std::size_t w = 0; w < nw; ++w) {
          if (emp(d, w) <= best + kTieTolerance * (1.0 + std::abs(best))) {
            kernel[w] = 1.0;
            break;
          }
        }
        break;
      }
      case LearnerKind::Gibbs: {
        const double scale = learner.beta * s.n;
        double best = emp(d, 0);
        for (std::size_t w = 1; w < nw; ++w) best = std::min(best, emp(d, w));
        double total = 0.0;
        for (std::size_t w = 0; w < nw; ++w) total += kernel[w] = std::exp(-scale * (emp(d, w) - best));
        for (double& k : kernel) k /= total;
        break;
      }
    }
    for (std::size_t w = 0; w < nw; ++w) table(d, w) = p * kernel[w];
  }
  return ExactJoint(std::move(table), std::move(emp), std::move(law), test_risk, nz, s.n);
}

double exact_gen_error(const ExactJoint& j) {
  double gen = 0.0;
  for (std::size_t d = 0; d < j.datasets(); ++d)
    for (std::size_t w = 0; w < j.hypotheses(); ++w)
      gen += j.table()(d, w) * (j.test_risk()[w] - j.empirical_risk()(d, w));
  return gen;
}

double exact_mi(const ExactJoint& j) { return mutual_information(j.joint()); }

double per_sample_mi(const ExactJoint& j, std::size_t i) {
  if (i >= static_cast<std::size_t>(j.n())) throw std::out_of_range("per_sample_mi: sample index out of range");
  Matrix marginal(j.instances(), j.hypotheses());
  for (std::size_t d = 0; d < j.datasets(); ++d) {
    const std::size_t z = j.sample(d, static_cast<int>(i));
    for (std::size_t w = 0; w < j.hypotheses(); ++w) marginal(z, w) += j.table()(d, w);
  }
  return mutual_information(JointTable(std::move(marginal)));
}

double empirical_tail(const ExactJoint& j, double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
  double mass = 0.0;
  for (std::size_t d = 0; d < j.datasets(); ++d)
    for (std::size_t w = 0; w < j.hypotheses(); ++w)
      if (std::abs(j.test_risk()[w] - j.empirical_risk()(d, w)) >= eta - 1e-12) mass += j.table()(d, w);
  return std::min(mass, 1.0);
}

double v_n_exact(const Scenario& s) {
  s.validate();
  const auto& aux = require_aux(s);
  const std::size_t nz = s.instances(), nw = s.hypotheses();
  std::vector<std::vector<int>> counts;
  std::vector<int> scratch;
  // Number of count vectors is C(n + |Z| - 1, |Z| - 1).
  double types = 1.0;
  for (std::size_t k = 1; k < nz; ++k) types = types * static_cast<double>(s.n + k) / static_cast<double>(k);
  if (types * static_cast<double>(nw) > kEnumerationCap) throw CapExceeded("v_n_exact: too many count vectors");
  count_vectors(s.n, nz, scratch, counts);

  const double log_n_fact = std::lgamma(s.n + 1.0);
  double total = 0.0;
  for (const auto& k : counts) {
    double log_p = log_n_fact;
    bool possible = true;
    for (std::size_t z = 0; z < nz; ++z) {
      if (k[z] == 0) continue;
      if (s.train_dist[z] == 0.0) {
        possible = false;
        break;
      }
      log_p += k[z] * std::log(s.train_dist[z]) - std::lgamma(k[z] + 1.0);
    }
    if (!possible) continue;
    double best = kInfinity;
    for (std::size_t w = 0; w < nw; ++w) {
      double risk = 0.0;
      for (std::size_t z = 0; z < nz; ++z) risk += k[z] * aux(w, z);
      best = std::min(best, risk / s.n);
    }
    total += std::exp(log_p) * best;
  }
  return total;
}

double MonteCarloEstimate::single_dataset_margin(double fail_probability) const {
  if (!(fail_probability > 0.0 && fail_probability < 1.0)) throw std::invalid_argument("failure probability in (0,1)");
  return sensitivity * std::sqrt(std::log(2.0 / fail_probability) / (2.0 * n));
}

double MonteCarloEstimate::estimator_margin(double fail_probability) const {
  if (!(fail_probability > 0.0 && fail_probability < 1.0)) throw std::invalid_argument("failure probability in (0,1)");
  return sensitivity * std::sqrt(std::log(2.0 / fail_probability) / (2.0 * n * static_cast<double>(trials)));
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

MonteCarloEstimate v_n_monte_carlo(const Scenario& s, int trials, std::uint64_t seed) {
  s.validate();
  const auto& aux = require_aux(s);
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  const std::size_t nw = s.hypotheses();
  double c = 0.0;
  for (std::size_t w = 0; w < nw; ++w) {
    const auto row = aux.values().row(w);
    c = std::max(c, *std::max_element(row.begin(), row.end()) - *std::min_element(row.begin(), row.end()));
  }

  std::vector<double> risk(nw);
  double mean = 0.0, m2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::fill(risk.begin(), risk.end(), 0.0);
    for (int i = 0; i < s.n; ++i) {
      const std::size_t z = sample_symbol(s.train_dist, counter_uniform(seed, static_cast<std::uint64_t>(t),
                                                                        static_cast<std::uint64_t>(i)));
      for (std::size_t w = 0; w < nw; ++w) risk[w] += aux(w, z);
    }
    const double value = *std::min_element(risk.begin(), risk.end()) / s.n;
    const double delta = value - mean;
    mean += delta / (t + 1);
    m2 += delta * (value - mean);
  }
  MonteCarloEstimate out;
  out.estimate = mean;
  const double var = trials > 1 ? m2 / (trials - 1) : 0.0;
  out.standard_error = std::sqrt(var / trials);
  out.sensitivity = c;
  out.n = s.n;
  out.trials = trials;
  return out;
}

}  // namespace genbound
