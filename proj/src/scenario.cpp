#include "genbound/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "genbound/errors.hpp"

namespace genbound {

LossMatrix::LossMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("loss matrix is empty");
  for (double v : values_.data())
    if (!std::isfinite(v)) throw std::invalid_argument("loss matrix has a non-finite entry");
}

LossMatrix LossMatrix::tabulate(const std::vector<double>& hypotheses, const std::vector<double>& instances,
                                const std::function<double(double, double)>& loss) {
  Matrix m(hypotheses.size(), instances.size());
  for (std::size_t w = 0; w < hypotheses.size(); ++w)
    for (std::size_t z = 0; z < instances.size(); ++z) m(w, z) = loss(hypotheses[w], instances[z]);
  return LossMatrix(std::move(m));
}

double LossMatrix::min() const { return *std::min_element(values_.data().begin(), values_.data().end()); }
double LossMatrix::max() const { return *std::max_element(values_.data().begin(), values_.data().end()); }

double LossMatrix::max_row_range() const {
  double out = 0.0;
  for (std::size_t w = 0; w < values_.rows(); ++w) {
    auto row = values_.row(w);
    auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    out = std::max(out, *hi - *lo);
  }
  return out;
}

double LossMatrix::max_col_range() const {
  double out = 0.0;
  for (std::size_t z = 0; z < values_.cols(); ++z) {
    double lo = values_(0, z), hi = values_(0, z);
    for (std::size_t w = 1; w < values_.rows(); ++w) {
      lo = std::min(lo, values_(w, z));
      hi = std::max(hi, values_(w, z));
    }
    out = std::max(out, hi - lo);
  }
  return out;
}

std::vector<double> population_risk(const LossMatrix& loss, const FiniteDistribution& dist) {
  if (dist.size() != loss.instances()) throw DimensionError("distribution does not match loss columns");
  std::vector<double> risk(loss.hypotheses(), 0.0);
  for (std::size_t w = 0; w < loss.hypotheses(); ++w)
    for (std::size_t z = 0; z < loss.instances(); ++z) risk[w] += dist[z] * loss(w, z);
  return risk;
}

void Scenario::validate() const {
  if (test_dist.size() != train_dist.size()) {
    throw DimensionError("test and train distributions must share the instance alphabet");
  }
  if (loss.instances() != test_dist.size()) throw DimensionError("loss columns must match the instance alphabet");
  if (!hypothesis_labels.empty() && hypothesis_labels.size() != loss.hypotheses()) {
    throw DimensionError("hypothesis labels do not match loss rows");
  }
  if (!instance_labels.empty() && instance_labels.size() != loss.instances()) {
    throw DimensionError("instance labels do not match loss columns");
  }
  if (aux_loss && (aux_loss->hypotheses() != loss.hypotheses() || aux_loss->instances() != loss.instances())) {
    throw DimensionError("auxiliary loss must have the same shape as the loss");
  }
  if (n < 1) throw std::invalid_argument("sample size n must be positive");
}

double Scenario::loss_sigma2() const {
  const double sigma = hoeffding_sigma(0.0, loss.max_row_range());
  return sigma * sigma;
}

GapMatrix gap_matrix(const Scenario& s) {
  auto risk = population_risk(s.loss, s.test_dist);
  Matrix g(s.hypotheses(), s.instances());
  for (std::size_t w = 0; w < s.hypotheses(); ++w)
    for (std::size_t z = 0; z < s.instances(); ++z) g(w, z) = risk[w] - s.loss(w, z);
  return GapMatrix(std::move(g), std::move(risk));
}

std::vector<double> discretize_interval_hypothesis(int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("interval grid needs at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) grid[i] = static_cast<double>(i) / (grid_points - 1);
  return grid;
}

std::optional<std::function<double(double, double)>> named_loss(const std::string& name) {
  if (name == "product") return [](double w, double z) { return w * z; };
  if (name == "abs_diff") return [](double w, double z) { return std::abs(w - z); };
  if (name == "sq_diff") return [](double w, double z) { return (w - z) * (w - z); };
  if (name == "mismatch") return [](double w, double z) { return w != z ? 1.0 : 0.0; };
  if (name == "neg_mismatch") return [](double w, double z) { return w != z ? -1.0 : 0.0; };
  if (name == "zero") return [](double, double) { return 0.0; };
  return std::nullopt;
}

Scenario preset_scenario(const std::string& name, int grid_points) {
  const std::vector<double> instances{0.0, 1.0};
  const bool interval = name == "fig2" || name == "fig4";
  if (!interval && name != "fig1" && name != "fig3") {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  std::vector<double> hypotheses = interval ? discretize_interval_hypothesis(grid_points)
                                            : std::vector<double>{0.0, 1.0};
  const auto loss = *named_loss(interval ? "abs_diff" : "product");
  Scenario s{FiniteDistribution::bernoulli(0.5),
             FiniteDistribution::bernoulli(0.5),
             hypotheses,
             instances,
             LossMatrix::tabulate(hypotheses, instances, loss),
             std::nullopt,
             1};
  if (name == "fig3") {
    s.aux_loss = LossMatrix::tabulate(hypotheses, instances, *named_loss("neg_mismatch"));
    s.n = 10;
  } else if (name == "fig4") {
    s.aux_loss = LossMatrix::tabulate(hypotheses, instances, *named_loss("sq_diff"));
    s.n = 10;
  }
  return s;
}

}  // namespace genbound
