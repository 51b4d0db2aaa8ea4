// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "genbound/bounds.hpp"
#include "genbound/coupling.hpp"
#include "genbound/experiments/config.hpp"
#include "genbound/experiments/output.hpp"
#include "genbound/experiments/runners.hpp"
#include "genbound/learners.hpp"
#include "genbound/measures.hpp"
#include "genbound/rd_solver.hpp"
#include "oracles.hpp"

namespace gb = genbound;
namespace ex = genbound::experiments;
namespace gt = genbound::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds; <= 0 means none
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(lo + (hi - lo) * i / (points - 1));
  return out;
}

Outcome fig1_reproduction() {
  auto cfg = ex::preset_config("fig1");
  cfg.rates = linspace(0.0, 1.5, 50);
  cfg.rates.push_back(0.2);
  cfg.rates.push_back(std::numbers::ln2);
  std::sort(cfg.rates.begin(), cfg.rates.end());
  cfg.rates.erase(std::unique(cfg.rates.begin(), cfg.rates.end()), cfg.rates.end());
  const auto r = ex::run_curve(cfg);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(r.columns.begin(), r.columns.end(), name) - r.columns.begin());
  };
  const std::size_t d2 = col("d2_max_mu"), xr = col("xu_raginsky");
  Outcome o;
  double worst_excess = -INFINITY, gap02 = NAN, worst_sat = 0.0;
  for (const auto& row : r.rows) {
    const double rhs = std::sqrt(row.x / 2.0);
    worst_excess = std::max(worst_excess, row.values[d2] - rhs);
    if (std::abs(row.values[xr] - rhs) > 1e-12) o.passed = false;
    if (row.x == 0.2) gap02 = rhs - row.values[d2];
    if (row.x >= std::numbers::ln2) worst_sat = std::max(worst_sat, std::abs(row.values[d2] - 0.25));
  }
  o.passed = o.passed && r.converged() && worst_excess <= 0.0 && gap02 >= 0.05 && worst_sat <= 1e-4;
  o.detail = fmt("max(D2-sqrt(r/2))=%.3g, gap@0.2=%.4f, max|D2-0.25| for r>=ln2=%.2g", worst_excess, gap02, worst_sat);
  return o;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(2024);
  const std::vector<double> rates{0.05, 0.2, 0.5};
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto s = gt::random_scenario(rng, 2, t < 25 ? 2 : 3);
    const auto brute = gb::brute_force_d2(s, rates, 0.02);
    for (std::size_t i = 0; i < rates.size(); ++i) worst = std::max(worst, std::abs(gb::d2_at(s, rates[i]) - brute[i]));
  }
  return {worst <= 0.01, fmt("50 scenarios x 3 rates, max |d2 - brute| = %.3g (tol 0.01)", worst)};
}

Outcome constrained_chain() {
  Outcome o;
  const auto grid = linspace(0.0, 1.5, 20);
  double worst1 = -INFINITY, worst2 = -INFINITY, best_improvement = -INFINITY;
  for (int n : {1, 2, 3, 10}) {
    auto s = gb::preset_scenario("fig3");
    s.n = n;
    const double v_n = gb::v_n_exact(s);
    for (double r : grid) {
      const double c = gb::d2_constrained_at(s, r / n, v_n);
      const double d2 = gb::d2_at(s, r / n);
      worst2 = std::max(worst2, c - d2);
      best_improvement = std::max(best_improvement, d2 - c);
      if (n <= 3) worst1 = std::max(worst1, gb::d1_exact_tiny(s, r) - c);
    }
  }
  o.passed = worst1 <= 1e-8 && worst2 <= 1e-8 && best_improvement > 1e-3;
  o.detail = fmt("max(D1-D2c)=%.3g, max(D2c-D2)=%.3g, max(D2-D2c)=%.4f", worst1, worst2, best_improvement);
  return o;
}

Outcome sandwich_suite() {
  ex::ExperimentConfig cfg;
  const auto report = ex::run_validate(cfg);
  std::size_t failed = 0;
  double min_slack = INFINITY;
  for (const auto& c : report.checks) {
    if (!c.passed) ++failed;
    min_slack = std::min(min_slack, c.slack());
  }
  return {report.passed(), fmt("%.0f checks, %.0f failed, min slack %.3g", static_cast<double>(report.checks.size()),
                               static_cast<double>(failed), min_slack)};
}

Outcome tail_validity() {
  const ex::ValidateConfig v;
  std::size_t checks = 0, failed = 0;
  double min_slack = INFINITY;
  for (int i = 0; i < v.scenarios; ++i) {
    const auto s = ex::random_tiny_scenario(0, i, v.max_n, v.max_hypotheses);
    const double sigma2 = s.loss_sigma2();
    const double d2_mis = gb::renyi_divergence(s.train_dist, s.test_dist, 2.0);
    for (double beta : v.betas) {
      const auto j = gb::enumerate_joint(s, gb::LearnerSpec::gibbs(beta));
      const auto joint = j.joint();
      const double d2_joint = gb::renyi_divergence(joint.flatten(), joint.product_of_marginals().flatten(), 2.0);
      double eta_max = 0.0;
      for (std::size_t d = 0; d < j.datasets(); ++d)
        for (std::size_t w = 0; w < j.hypotheses(); ++w)
          if (j.table()(d, w) > 0.0) eta_max = std::max(eta_max, std::abs(j.test_risk()[w] - j.empirical_risk()(d, w)));
      for (double eta : linspace(0.0, 1.05 * eta_max + 1e-3, v.eta_points)) {
        const double lhs = gb::empirical_tail(j, eta);
        const double rhs = gb::high_prob_tail(sigma2, s.n, eta, d2_mis, d2_joint);
        ++checks;
        min_slack = std::min(min_slack, rhs - lhs);
        if (lhs > rhs) ++failed;
      }
    }
  }
  return {failed == 0, fmt("%.0f (scenario, beta, eta) triples, %.0f violations, min slack %.3g",
                           static_cast<double>(checks), static_cast<double>(failed), min_slack)};
}

Outcome exact_anchors() {
  auto s = gb::preset_scenario("fig3");
  const double v10 = gb::v_n_exact(s);
  const double kl = gb::kl_divergence(gb::FiniteDistribution::bernoulli(0.5), gb::FiniteDistribution::bernoulli(0.25));
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const gb::FiniteDistribution p(gt::random_probs(rng, 2 + t % 4)), q(gt::random_probs(rng, 2 + t % 4));
    worst = std::max(worst, std::abs(gb::renyi_divergence(p, q, 2.0) - std::log1p(gb::chi_squared(p, q))));
  }
  const double pen = gb::cor2_penalty(1.0, 100, 0.01);
  const bool ok = std::abs(v10 - (-0.6230469)) <= 1e-10 + 5e-8 && std::abs(v10 - gt::anchors::kV10) <= 1e-10 &&
                  std::abs(kl - 0.143841) <= 1e-6 && worst <= 1e-10 && std::abs(pen - 0.0141777) <= 1e-6;
  Outcome o{ok, fmt("v10=%.10f, KL=%.7f, Renyi2-vs-chi2 max err %.2g", v10, kl, worst)};
  o.detail += fmt(", penalty=%.8f", pen);
  return o;
}

Outcome generic_lower_bound() {
  double worst = 0.0;
  for (double r : linspace(0.01, 1.0, 10)) {
    for (double g : linspace(0.0, 0.5, 10)) {
      const double lower = gb::thm3_lower(r, g, [](double l) { return 0.125 * l * l; });
      worst = std::max(worst, std::abs(lower + gb::cor1_upper(0.25, 1, r, g)));
    }
  }
  const double cert = -gb::thm3_lower(std::numbers::ln2, 0.0, [](double l) { return std::log(std::cosh(l / 2.0)); });
  const double solver = gb::d2_at(gt::fig1_scenario(), std::numbers::ln2);
  const bool ok = worst <= 1e-9 && cert <= 0.5003 && std::abs(solver - 0.25) <= 1e-3 && solver <= cert;
  return {ok, fmt("sub-Gaussian max err %.2g, certificate D2(ln2) <= %.5f, solver %.6f", worst, cert, solver)};
}

Outcome misspec_remark() {
  ex::ExperimentConfig cfg;
  cfg.misspec.n = 100;
  cfg.misspec.sigma2 = 0.25;
  cfg.misspec.delta = 0.1;
  cfg.misspec.regimes = {"inv_sqrt_n"};
  cfg.misspec.gammas = linspace(0.001, 0.05, 50);
  const auto r = ex::run_misspec(cfg);
  const auto a = std::find(r.columns.begin(), r.columns.end(), "bound_a[inv_sqrt_n]") - r.columns.begin();
  const auto b = std::find(r.columns.begin(), r.columns.end(), "bound_b[inv_sqrt_n]") - r.columns.begin();
  double worst = -INFINITY;
  for (const auto& row : r.rows) worst = std::max(worst, row.values[b] - row.values[a]);
  return {worst < 0.0 && r.rows.size() == 50, fmt("max(bound_b - bound_a) over 50 gammas = %.4f", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "genbound_acceptance_determinism";
  fs::remove_all(base);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(GENBOUND_CLI_PATH) + " reproduce fig1 --seed 7 --svg --out " +
                            (base / run).string() + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, std::string("CLI run '") + run + "' failed"};
  }
  bool same = true;
  for (const char* f : {"fig1.csv", "fig1.svg"}) {
    const auto a = slurp(base / "a" / f), b = slurp(base / "b" / f);
    same = same && !a.empty() && a == b;
  }
  return {same, same ? "fig1.csv and fig1.svg byte-identical across two runs" : "outputs differ"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "fig1 reproduction", 30.0, fig1_reproduction},
      {2, "oracle equivalence", 120.0, oracle_equivalence},
      {3, "constrained chain", 60.0, constrained_chain},
      {4, "sandwich suite", 120.0, sandwich_suite},
      {5, "tail validity", 60.0, tail_validity},
      {6, "exact anchors", 5.0, exact_anchors},
      {7, "generic lower bound", 10.0, generic_lower_bound},
      {8, "misspecification remark", 1.0, misspec_remark},
      {9, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit <= 0.0 || secs <= c.time_limit;
    const bool pass = o.passed && in_time;
    if (!pass) ++failures;
    std::printf("%s [%d] %s: %s (%.2fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
