#include "genbound/coupling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "genbound/errors.hpp"

namespace genbound {

namespace {

struct Reduced {
  std::vector<std::size_t> rows, cols;  // indices of positive atoms
  std::vector<double> a, b;
  Matrix cost;
};

Reduced reduce(const FiniteDistribution& rows, const FiniteDistribution& cols, const Matrix& cost) {
  if (cost.rows() != rows.size() || cost.cols() != cols.size()) {
    throw DimensionError("cost matrix does not match the marginals");
  }
  Reduced r;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i] > 0.0) r.rows.push_back(i);
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (cols[j] > 0.0) r.cols.push_back(j);
  for (auto i : r.rows) r.a.push_back(rows[i]);
  for (auto j : r.cols) r.b.push_back(cols[j]);
  r.cost = Matrix(r.rows.size(), r.cols.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    for (std::size_t j = 0; j < r.cols.size(); ++j) r.cost(i, j) = cost(r.rows[i], r.cols[j]);
  return r;
}

Matrix expand(const Reduced& r, const Matrix& plan, std::size_t rows, std::size_t cols) {
  Matrix full(rows, cols);
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    for (std::size_t j = 0; j < r.cols.size(); ++j) full(r.rows[i], r.cols[j]) = plan(i, j);
  return full;
}

double log_sum_exp(const std::vector<double>& xs) {
  double hi = -kInfinity;
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

// Dual potentials of the entropic program; the plan is
// pi = a_i b_j exp((f_i + h_j - C_ij) / eps).
class EntropicDual {
 public:
  EntropicDual(const Reduced& r, double eps) : r_(r), eps_(eps), f_(r.a.size(), 0.0), h_(r.b.size(), 0.0) {
    for (int sweep = 0; sweep < 20; ++sweep) {
      update_rows();
      update_cols();
    }
    update_rows();
  }

  bool newton(int max_iter, double tol) {
    const std::size_t m = f_.size(), k = h_.size();
    const std::size_t dim = m + k - 1;
    for (int it = 0; it < max_iter; ++it) {
      Matrix plan = current_plan(f_, h_);
      const auto rs = plan.row_sums();
      const auto cs = plan.col_sums();
      Eigen::VectorXd grad(dim);
      double err = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        grad(i) = r_.a[i] - rs[i];
        err += std::abs(grad(i));
      }
      for (std::size_t j = 0; j < k; ++j) {
        const double gj = r_.b[j] - cs[j];
        err += std::abs(gj);
        if (j + 1 < k) grad(m + j) = gj;
      }
      if (err <= tol) return true;

      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
      for (std::size_t i = 0; i < m; ++i) hess(i, i) = rs[i];
      for (std::size_t j = 0; j + 1 < k; ++j) {
        hess(m + j, m + j) = cs[j];
        for (std::size_t i = 0; i < m; ++i) {
          hess(i, m + j) = plan(i, j);
          hess(m + j, i) = plan(i, j);
        }
      }
      hess.diagonal().array() += 1e-15 * (1.0 + hess.diagonal().maxCoeff());
      const Eigen::VectorXd dir = eps_ * hess.ldlt().solve(grad);
      if (!dir.allFinite()) return false;

      const double base = objective(f_, h_);
      const double slope = grad.dot(dir);
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        auto f = f_;
        auto h = h_;
        for (std::size_t i = 0; i < m; ++i) f[i] += t * dir(i);
        for (std::size_t j = 0; j + 1 < k; ++j) h[j] += t * dir(m + j);
        const double val = objective(f, h);
        if (std::isfinite(val) && val >= base + 1e-4 * t * slope) {
          f_ = std::move(f);
          h_ = std::move(h);
          moved = true;
          break;
        }
      }
      if (!moved) {
        // Line search stalls only at the floating-point floor of the objective.
        return err <= 1e-10;
      }
    }
    return false;
  }

  Matrix plan() const { return current_plan(f_, h_); }
  double log_density(std::size_t i, std::size_t j) const { return (f_[i] + h_[j] - r_.cost(i, j)) / eps_; }

 private:
  void update_rows() {
    std::vector<double> terms(h_.size());
    for (std::size_t i = 0; i < f_.size(); ++i) {
      for (std::size_t j = 0; j < h_.size(); ++j) terms[j] = std::log(r_.b[j]) + (h_[j] - r_.cost(i, j)) / eps_;
      f_[i] = -eps_ * log_sum_exp(terms);
    }
  }

  void update_cols() {
    std::vector<double> terms(f_.size());
    for (std::size_t j = 0; j < h_.size(); ++j) {
      for (std::size_t i = 0; i < f_.size(); ++i) terms[i] = std::log(r_.a[i]) + (f_[i] - r_.cost(i, j)) / eps_;
      h_[j] = -eps_ * log_sum_exp(terms);
    }
    // Gauge: the last column potential is pinned at zero.
    const double shift = h_.back();
    for (auto& v : h_) v -= shift;
    for (auto& v : f_) v += shift;
  }

  Matrix current_plan(const std::vector<double>& f, const std::vector<double>& h) const {
    Matrix plan(f.size(), h.size());
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < h.size(); ++j)
        plan(i, j) = r_.a[i] * r_.b[j] * std::exp((f[i] + h[j] - r_.cost(i, j)) / eps_);
    return plan;
  }

  double objective(const std::vector<double>& f, const std::vector<double>& h) const {
    double val = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) val += r_.a[i] * f[i];
    for (std::size_t j = 0; j < h.size(); ++j) val += r_.b[j] * h[j];
    double mass = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      for (std::size_t j = 0; j < h.size(); ++j) {
        const double e = (f[i] + h[j] - r_.cost(i, j)) / eps_;
        if (e > 700.0) return -kInfinity;
        mass += r_.a[i] * r_.b[j] * std::exp(e);
      }
    }
    return val - eps_ * mass;
  }

  const Reduced& r_;
  double eps_;
  std::vector<double> f_, h_;
};

}  // namespace

double Coupling::mismatch_probability() const {
  double diag = 0.0;
  for (std::size_t i = 0; i < std::min(mass.rows(), mass.cols()); ++i) diag += mass(i, i);
  return std::max(0.0, 1.0 - diag);
}

double Coupling::marginal_error() const {
  const auto rs = mass.row_sums();
  const auto cs = mass.col_sums();
  double err = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) err = std::max(err, std::abs(rs[i] - row_target[i]));
  for (std::size_t j = 0; j < cs.size(); ++j) err = std::max(err, std::abs(cs[j] - col_target[j]));
  return err;
}

double d3_zero(const FiniteDistribution& pw, const Scenario& s) {
  s.validate();
  if (pw.size() != s.hypotheses()) throw DimensionError("d3_zero: output law does not match the hypothesis grid");
  const auto test = population_risk(s.loss, s.test_dist);
  const auto train = population_risk(s.loss, s.train_dist);
  double out = 0.0;
  for (std::size_t w = 0; w < pw.size(); ++w) out += pw[w] * (test[w] - train[w]);
  return out;
}

EntropicSolution entropic_coupling(const FiniteDistribution& rows, const FiniteDistribution& cols,
                                   const Matrix& cost, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("entropic_coupling requires epsilon > 0");
  const auto r = reduce(rows, cols, cost);
  Matrix plan;
  bool converged = true;
  double rate = 0.0;
  if (r.a.size() == 1 || r.b.size() == 1 || std::isinf(epsilon)) {
    plan = Matrix(r.a.size(), r.b.size());
    for (std::size_t i = 0; i < r.a.size(); ++i)
      for (std::size_t j = 0; j < r.b.size(); ++j) plan(i, j) = r.a[i] * r.b[j];
  } else {
    EntropicDual dual(r, epsilon);
    converged = dual.newton(500, 1e-12);
    plan = dual.plan();
    for (std::size_t i = 0; i < plan.rows(); ++i)
      for (std::size_t j = 0; j < plan.cols(); ++j)
        if (plan(i, j) > 0.0) rate += plan(i, j) * dual.log_density(i, j);
    rate = std::max(rate, 0.0);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i)
    for (std::size_t j = 0; j < plan.cols(); ++j) value += plan(i, j) * r.cost(i, j);
  return {epsilon, rate, value, expand(r, plan, rows.size(), cols.size()), converged};
}

TransportPlan optimal_transport(const FiniteDistribution& rows, const FiniteDistribution& cols, const Matrix& cost) {
  const auto r = reduce(rows, cols, cost);
  const std::size_t m = r.a.size(), k = r.b.size();
  // Nodes 0..m-1 are sources, m..m+k-1 sinks. Forward arcs are uncapacitated,
  // backward arcs carry the current flow as capacity.
  Matrix flow(m, k);
  std::vector<double> supply = r.a, demand = r.b;
  constexpr double kEps = 1e-15;
  for (int round = 0; round < 100000; ++round) {
    double remaining = 0.0;
    for (double s : supply) remaining += s;
    if (remaining <= 1e-14) break;
    // Bellman-Ford from every source with remaining supply.
    std::vector<double> dist(m + k, kInfinity);
    std::vector<long> parent(m + k, -1);
    for (std::size_t i = 0; i < m; ++i)
      if (supply[i] > kEps) dist[i] = 0.0;
    for (std::size_t pass = 0; pass < m + k; ++pass) {
      bool changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          if (dist[i] + r.cost(i, j) < dist[m + j] - 1e-15) {
            dist[m + j] = dist[i] + r.cost(i, j);
            parent[m + j] = static_cast<long>(i);
            changed = true;
          }
          if (flow(i, j) > kEps && dist[m + j] - r.cost(i, j) < dist[i] - 1e-15) {
            dist[i] = dist[m + j] - r.cost(i, j);
            parent[i] = static_cast<long>(m + j);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    std::optional<std::size_t> sink;
    for (std::size_t j = 0; j < k; ++j)
      if (demand[j] > kEps && std::isfinite(dist[m + j]) && (!sink || dist[m + j] < dist[m + *sink])) sink = j;
    if (!sink) break;
    // Walk back to the originating source and find the bottleneck.
    std::size_t node = m + *sink;
    double amount = demand[*sink];
    while (parent[node] >= 0) {
      const auto prev = static_cast<std::size_t>(parent[node]);
      if (prev >= m) amount = std::min(amount, flow(node, prev - m));  // backward arc sink->source
      node = prev;
    }
    amount = std::min(amount, supply[node]);
    const std::size_t source = node;
    node = m + *sink;
    while (parent[node] >= 0) {
      const auto prev = static_cast<std::size_t>(parent[node]);
      if (prev < m) {
        flow(prev, node - m) += amount;
      } else {
        flow(node, prev - m) -= amount;
      }
      node = prev;
    }
    supply[source] -= amount;
    demand[*sink] -= amount;
  }
  double value = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) value += std::max(flow(i, j), 0.0) * r.cost(i, j);
  return {value, expand(r, flow, rows.size(), cols.size())};
}

D4Result d4(const FiniteDistribution& pw, const Scenario& s, double rate) {
  if (!(rate >= 0.0)) throw std::invalid_argument("d4_at requires rate >= 0");
  const double base = d3_zero(pw, s);
  if (rate == 0.0) return {base, kInfinity, true};
  const auto gap = gap_matrix(s);
  const auto& cost = gap.values();

  auto solve = [&](double eps) { return entropic_coupling(pw, s.train_dist, cost, eps); };
  // Weak duality: D4(r) >= V(eps) + eps * (I(eps) - r) for every eps.
  auto tangent = [&](const EntropicSolution& e) { return e.value + e.epsilon * (e.rate - rate); };

  constexpr int kGrid = 64;
  const double lo_log = std::log(1e-3), hi_log = std::log(1e3);
  auto grid_eps = [&](int i) { return std::exp(lo_log + (hi_log - lo_log) * i / (kGrid - 1)); };

  auto sharpest = solve(grid_eps(0));
  if (sharpest.rate <= rate) {
    const auto ot = optimal_transport(pw, s.train_dist, cost);
    return {std::min(base, std::max(ot.value, tangent(sharpest))), 0.0, sharpest.converged};
  }
  // Rate is nonincreasing in eps: find the first grid eps whose rate is <= r.
  EntropicSolution lo = sharpest;  // rate > r
  std::optional<EntropicSolution> hi;
  int a = 1, b = kGrid;
  while (a < b) {
    const int mid = (a + b) / 2;
    auto e = solve(grid_eps(mid));
    if (e.rate <= rate) {
      hi = std::move(e);
      b = mid;
    } else {
      lo = std::move(e);
      a = mid + 1;
    }
  }
  for (double eps = grid_eps(kGrid - 1); !hi && eps < 1e12;) {
    eps *= 4.0;
    auto e = solve(eps);
    if (e.rate <= rate) {
      hi = std::move(e);
    } else {
      lo = std::move(e);
    }
  }
  if (hi) {
    for (int k = 0; k < 200; ++k) {
      if (std::abs(lo.rate - rate) <= 1e-12 || hi->epsilon / lo.epsilon - 1.0 <= 1e-13) break;
      auto e = solve(std::sqrt(lo.epsilon * hi->epsilon));
      if (e.rate <= rate) {
        hi = std::move(e);
      } else {
        lo = std::move(e);
      }
    }
  }
  double value = tangent(lo);
  double eps = lo.epsilon;
  bool converged = lo.converged;
  if (hi && tangent(*hi) > value) {
    value = tangent(*hi);
    eps = hi->epsilon;
    converged = hi->converged;
  }
  return {std::min(base, value), eps, converged};
}

double d4_at(const FiniteDistribution& pw, const Scenario& s, double rate) { return d4(pw, s, rate).value; }

double ot_brute_force(const FiniteDistribution& pw, const FiniteDistribution& pz, const Matrix& cost) {
  const std::size_t m = pw.size(), k = pz.size();
  if (m > 4 || k > 4) throw CapExceeded("ot_brute_force: alphabets larger than 4");
  if (cost.rows() != m || cost.cols() != k) throw DimensionError("cost matrix does not match the marginals");
  const std::size_t edges = m * k, tree = m + k - 1;
  double best = kInfinity;
  // Enumerate edge subsets of size m+k-1 via bitmasks.
  for (unsigned mask = 0; mask < (1u << edges); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != tree) continue;
    // Spanning tree check with union-find.
    std::vector<std::size_t> parent(m + k);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    bool acyclic = true;
    for (std::size_t e = 0; e < edges && acyclic; ++e) {
      if (!(mask & (1u << e))) continue;
      const auto u = find(e / k), v = find(m + e % k);
      if (u == v) acyclic = false;
      parent[u] = v;
    }
    if (!acyclic) continue;
    // Solve the flows by peeling leaves.
    std::vector<double> residual(m + k);
    for (std::size_t i = 0; i < m; ++i) residual[i] = pw[i];
    for (std::size_t j = 0; j < k; ++j) residual[m + j] = pz[j];
    std::vector<bool> alive(edges, false);
    for (std::size_t e = 0; e < edges; ++e) alive[e] = mask & (1u << e);
    std::vector<double> flow(edges, 0.0);
    bool feasible = true;
    for (std::size_t step = 0; step < tree && feasible; ++step) {
      std::vector<int> degree(m + k, 0);
      for (std::size_t e = 0; e < edges; ++e)
        if (alive[e]) {
          ++degree[e / k];
          ++degree[m + e % k];
        }
      std::optional<std::size_t> leaf_edge;
      for (std::size_t e = 0; e < edges && !leaf_edge; ++e)
        if (alive[e] && (degree[e / k] == 1 || degree[m + e % k] == 1)) leaf_edge = e;
      if (!leaf_edge) {
        feasible = false;
        break;
      }
      const std::size_t e = *leaf_edge, u = e / k, v = m + e % k;
      const std::size_t leaf = degree[u] == 1 ? u : v;
      const std::size_t other = leaf == u ? v : u;
      flow[e] = residual[leaf];
      residual[other] -= flow[e];
      residual[leaf] = 0.0;
      alive[e] = false;
      if (flow[e] < -1e-12) feasible = false;
    }
    if (!feasible) continue;
    double value = 0.0;
    for (std::size_t e = 0; e < edges; ++e) value += flow[e] * cost(e / k, e % k);
    best = std::min(best, value);
  }
  return best;
}

Coupling maximal_coupling(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (p.size() != q.size()) throw DimensionError("maximal_coupling: alphabet sizes differ");
  const std::size_t n = p.size();
  Matrix mass(n, n);
  std::vector<double> common(n);
  for (std::size_t i = 0; i < n; ++i) {
    common[i] = std::min(p[i], q[i]);
    mass(i, i) = common[i];
  }
  const double tv = tv_distance(p, q);
  if (tv > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) mass(i, j) += (p[i] - common[i]) * (q[j] - common[j]) / tv;
  }
  return {std::move(mass), p, q};
}

}  // namespace genbound
