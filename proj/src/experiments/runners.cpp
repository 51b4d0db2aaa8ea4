#include "genbound/experiments/runners.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "genbound/bounds.hpp"
#include "genbound/coupling.hpp"
#include "genbound/errors.hpp"
#include "genbound/learners.hpp"
#include "genbound/rd_solver.hpp"

namespace genbound::experiments {

namespace {

const std::vector<std::string> kCurveBounds = {"xu_raginsky", "cor1_upper", "d2", "d2_max_mu", "d2_constrained",
                                               "d1_exact"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void require_grid(const ExperimentConfig& c) {
  if (c.rates.empty()) throw ConfigError("sweep.r", "rate grid is empty");
}

double aux_sensitive_v_n(const ExperimentConfig& c) {
  if (c.v_n) return *c.v_n;
  try {
    return v_n_exact(c.scenario);
  } catch (const CapExceeded& e) {
    throw ConfigError("bounds.v_n", std::string(e.what()) + "; give v_n explicitly");
  }
}

// Sub-Gaussian parameter of loss(W, z) for any law of W: half the largest per-instance range.
double alpha_sub(const Scenario& s) { return 0.5 * s.loss.max_col_range(); }

}  // namespace

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(workers, count); ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SweepResult run_curve(const ExperimentConfig& c) {
  if (c.bounds.empty()) throw ConfigError("bounds.list", "no bounds selected");
  require_grid(c);
  for (const auto& b : c.bounds) {
    if (std::find(kCurveBounds.begin(), kCurveBounds.end(), b) == kCurveBounds.end())
      throw ConfigError("bounds.list", "unknown bound '" + b + "'");
  }
  const auto& s = c.scenario;
  const double n = s.n;
  const double sigma2 = c.effective_sigma2();
  const std::size_t rows = c.rates.size(), cols = c.bounds.size();

  SweepResult out;
  out.columns = c.bounds;
  out.unit = c.unit;
  out.config_hash = config_hash(c);
  out.rows.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    out.rows[i].x = c.rates[i];
    out.rows[i].values.assign(cols, 0.0);
  }
  std::vector<std::vector<std::string>> cell_flags(rows * cols);

  for (std::size_t b = 0; b < cols; ++b) {
    const auto& name = c.bounds[b];
    auto set = [&](std::size_t i, double v, bool converged = true) {
      out.rows[i].values[b] = v;
      if (!converged) cell_flags[i * cols + b].push_back(name + ":nonconverged");
    };
    if (name == "xu_raginsky") {
      for (std::size_t i = 0; i < rows; ++i) set(i, xu_raginsky(sigma2, s.n, c.rates[i]));
    } else if (name == "cor1_upper") {
      const double gamma = c.effective_gamma();
      for (std::size_t i = 0; i < rows; ++i) set(i, cor1_upper(sigma2, s.n, c.rates[i], gamma));
    } else if (name == "d2") {
      parallel_for(rows, c.threads, [&](std::size_t i) {
        const auto p = d2_point(s, c.rates[i] / n);
        set(i, p.value, p.converged);
      });
    } else if (name == "d1_exact") {
      parallel_for(rows, c.threads, [&](std::size_t i) {
        try {
          set(i, d1_exact_tiny(s, c.rates[i]));
        } catch (const CapExceeded& e) {
          throw ConfigError("bounds.list", std::string("d1_exact: ") + e.what());
        }
      });
    } else if (name == "d2_constrained") {
      if (!s.aux_loss) throw ConfigError("scenario.aux_loss", "d2_constrained needs an auxiliary loss");
      const double v_n = aux_sensitive_v_n(c);
      parallel_for(rows, c.threads, [&](std::size_t i) {
        try {
          const auto r = d2_constrained(s, c.rates[i] / n, v_n);
          set(i, r.point.value, r.point.converged);
        } catch (const Infeasible&) {
          out.rows[i].values[b] = std::nan("");
          cell_flags[i * cols + b].push_back(name + ":infeasible");
        }
      });
    } else if (name == "d2_max_mu") {
      if (!c.mu_sweep) throw ConfigError("scenario.mu_sweep", "d2_max_mu needs mu_sweep = bernoulli");
      const auto grid = static_cast<std::size_t>(c.mu_grid);
      auto bernoulli_scenario = [&](std::size_t k) {
        Scenario sk = s;
        sk.test_dist = FiniteDistribution::bernoulli(static_cast<double>(k) / static_cast<double>(grid - 1));
        sk.train_dist = sk.test_dist;
        return sk;
      };
      std::vector<RDCurve> curves(grid);
      parallel_for(grid, c.threads, [&](std::size_t k) { curves[k] = d2_curve(bernoulli_scenario(k)); });
      bool traced = true;
      for (const auto& curve : curves) traced = traced && curve.converged;
      // The envelope screens the laws; the leading candidates are solved exactly at each rate.
      constexpr std::size_t kCandidates = 3;
      parallel_for(rows, c.threads, [&](std::size_t i) {
        const double rate = c.rates[i] / n;
        std::vector<std::pair<double, std::size_t>> ranked(grid);
        for (std::size_t k = 0; k < grid; ++k) ranked[k] = {curves[k].value_at(rate), k};
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
          return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        double best = ranked.front().first;
        bool converged = traced;
        for (std::size_t j = 0; j < std::min(kCandidates, grid); ++j) {
          const auto point = d2_point(bernoulli_scenario(ranked[j].second), rate);
          converged = converged && point.converged;
          best = std::max(best, point.value);
        }
        set(i, best, converged);
      });
    }
  }
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t b = 0; b < cols; ++b)
      for (auto& f : cell_flags[i * cols + b]) out.rows[i].flags.push_back(std::move(f));
  return out;
}

SweepResult run_constrained_curve(const ExperimentConfig& c) {
  if (!c.scenario.aux_loss) throw ConfigError("scenario.aux_loss", "constrained curve needs an auxiliary loss");
  if (c.bounds.empty()) {
    auto copy = c;
    copy.bounds = {"d2", "d2_constrained"};
    return run_curve(copy);
  }
  return run_curve(c);
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const InequalityCheck& k) { return k.passed; });
}

std::string ValidationReport::text() const {
  std::ostringstream out;
  std::size_t failed = 0;
  for (const auto& k : checks) {
    out << (k.passed ? "PASS " : "FAIL ") << k.instance << " " << k.name << " lhs=" << fmt(k.lhs)
        << " rhs=" << fmt(k.rhs) << " slack=" << fmt(k.slack()) << "\n";
    failed += k.passed ? 0 : 1;
  }
  out << "checks: " << checks.size() << ", failed: " << failed << "\n";
  for (const auto& inst : failing_instances) out << "--- failing instance ---\n" << inst;
  return out.str();
}

ValidationReport run_validate(const ExperimentConfig& c) {
  const auto& v = c.validate;
  struct Case {
    std::string label;
    Scenario scenario;
    LearnerSpec learner;
  };
  std::vector<Case> cases;
  if (v.suite == "config") {
    cases.push_back({"config " + c.learner.describe(), c.scenario, c.learner});
  } else {
    for (int i = 0; i < v.scenarios; ++i) {
      const auto s = random_tiny_scenario(c.seed, i, v.max_n, v.max_hypotheses);
      for (double beta : v.betas) {
        cases.push_back({"instance=" + std::to_string(i) + " beta=" + fmt(beta), s, LearnerSpec::gibbs(beta)});
      }
    }
  }

  std::vector<std::vector<InequalityCheck>> results(cases.size());
  parallel_for(cases.size(), c.threads, [&](std::size_t k) {
    const auto& cs = cases[k];
    const auto& s = cs.scenario;
    const auto j = enumerate_joint(s, cs.learner);
    const double gen = exact_gen_error(j);
    const double mi = std::max(0.0, exact_mi(j));
    const auto pw = j.output_law();
    const double sigma2 = s.loss_sigma2();
    const double gamma = kl_divergence(s.train_dist, s.test_dist);
    const double alpha = alpha_sub(s);
    const double d3z = d3_zero(pw, s);
    auto psi = [alpha](double x) { return std::exp(0.5 * x * x * alpha * alpha); };
    std::vector<double> per_sample(static_cast<std::size_t>(s.n));
    double d2_ps = 0.0;
    for (int i = 0; i < s.n; ++i) {
      per_sample[i] = std::max(0.0, per_sample_mi(j, static_cast<std::size_t>(i)));
      d2_ps += d2_at(s, per_sample[i]) / s.n;
    }
    const double d2_mean = d2_at(s, mi / s.n);

    auto& out = results[k];
    auto add = [&](const std::string& name, double lhs, double rhs) { out.push_back({cs.label, name, lhs, rhs, true}); };
    add("thm4_lower<=gen", thm4_lower(d3z, psi, s.n, mi), gen);
    if (mi > 0.0) add("cor2_lower<=gen", cor2_lower(d3z, alpha, s.n, mi), gen);
    add("d4_lower<=gen", d4_at(pw, s, mi / s.n), gen);
    add("gen<=d2_upper", gen, d2_mean);
    add("d2_upper<=cor1_upper", d2_mean, cor1_upper(sigma2, s.n, mi, gamma));
    add("gen<=d2_per_sample", gen, d2_ps);
    add("gen<=per_sample_upper", gen, per_sample_upper(sigma2, per_sample, gamma));

    const auto joint = j.joint();
    const double d2_joint = renyi_divergence(joint.flatten(), joint.product_of_marginals().flatten(), 2.0);
    const double d2_mis = renyi_divergence(s.train_dist, s.test_dist, 2.0);
    double eta_max = 0.0;
    for (std::size_t d = 0; d < j.datasets(); ++d)
      for (std::size_t w = 0; w < j.hypotheses(); ++w)
        eta_max = std::max(eta_max, std::abs(j.test_risk()[w] - j.empirical_risk()(d, w)));
    InequalityCheck worst{cs.label, "empirical_tail<=high_prob_tail", 0.0, 0.0, true};
    bool first = true;
    for (int e = 1; e <= v.eta_points; ++e) {
      const double eta = 1.05 * eta_max * e / v.eta_points;
      const double lhs = empirical_tail(j, eta);
      const double rhs = high_prob_tail(sigma2, s.n, eta, d2_mis, d2_joint);
      if (first || rhs - lhs < worst.slack()) {
        worst.lhs = lhs;
        worst.rhs = rhs;
        worst.name = "empirical_tail<=high_prob_tail(eta=" + fmt(eta) + ")";
        first = false;
      }
    }
    out.push_back(worst);

    for (auto& chk : out) {
      if (!v.corrupt.empty() && chk.name.rfind(v.corrupt, 0) == 0) chk.lhs = chk.rhs + 1.0;
      chk.passed = chk.lhs <= chk.rhs + v.slack;
    }
  });

  ValidationReport report;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    bool ok = true;
    for (auto& chk : results[k]) {
      ok = ok && chk.passed;
      report.checks.push_back(std::move(chk));
    }
    if (!ok) {
      ExperimentConfig instance = c;
      instance.scenario = cases[k].scenario;
      instance.learner = cases[k].learner;
      instance.validate.suite = "config";
      report.failing_instances.push_back(canonical_text(instance));
    }
  }
  return report;
}

SweepResult run_misspec(const ExperimentConfig& c) {
  const auto& m = c.misspec;
  std::vector<double> gammas = m.gammas;
  if (gammas.empty()) {
    for (int i = 0; i < 50; ++i) gammas.push_back(0.001 + (0.05 - 0.001) * i / 49.0);
  }
  SweepResult out;
  out.x_name = "gamma";
  out.unit = c.unit;
  out.config_hash = config_hash(c);
  std::vector<std::vector<double>> betas;
  for (const auto& regime : m.regimes) {
    double b = 0.0;
    if (regime == "inv_sqrt_n") {
      b = 1.0 / std::sqrt(static_cast<double>(m.n));
    } else if (regime != "zero") {
      b = std::stod(regime);
    }
    betas.emplace_back(static_cast<std::size_t>(m.n), b);
    out.columns.push_back("bound_a[" + regime + "]");
    out.columns.push_back("bound_b[" + regime + "]");
  }
  for (double g : gammas) {
    SweepRow row;
    row.x = g;
    for (const auto& b : betas) {
      const auto r = misspec_eps_bounds(m.eps_base, m.eps_half, m.sigma2, g, b, m.delta);
      row.values.push_back(r.bound_a);
      row.values.push_back(r.bound_b);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<std::pair<std::string, double>> run_learner(const ExperimentConfig& c) {
  const auto& s = c.scenario;
  ExactJoint j = [&] {
    try {
      return enumerate_joint(s, c.learner);
    } catch (const CapExceeded& e) {
      throw ConfigError("scenario.n", e.what());
    }
  }();
  std::vector<std::pair<std::string, double>> out;
  const double gen = exact_gen_error(j);
  const double mi = std::max(0.0, exact_mi(j));
  const double sigma2 = c.effective_sigma2();
  const double gamma = c.effective_gamma();
  const auto pw = j.output_law();
  const double d3z = d3_zero(pw, s);
  const double alpha = alpha_sub(s);
  out.emplace_back("n", s.n);
  out.emplace_back("gen_error", gen);
  out.emplace_back("mutual_information", mi);
  std::vector<double> per_sample;
  for (int i = 0; i < s.n; ++i) {
    per_sample.push_back(std::max(0.0, per_sample_mi(j, static_cast<std::size_t>(i))));
    out.emplace_back("per_sample_mi_" + std::to_string(i), per_sample.back());
  }
  for (std::size_t w = 0; w < pw.size(); ++w) out.emplace_back("output_law_" + std::to_string(w), pw[w]);
  out.emplace_back("sigma2", sigma2);
  out.emplace_back("gamma", gamma);
  out.emplace_back("d2_at_mi_over_n", d2_at(s, mi / s.n));
  out.emplace_back("cor1_upper", cor1_upper(sigma2, s.n, mi, gamma));
  out.emplace_back("per_sample_upper", per_sample_upper(sigma2, per_sample, gamma));
  out.emplace_back("d3_zero", d3z);
  out.emplace_back("d4_at_mi_over_n", d4_at(pw, s, mi / s.n));
  auto psi = [alpha](double x) { return std::exp(0.5 * x * x * alpha * alpha); };
  out.emplace_back("thm4_lower", thm4_lower(d3z, psi, s.n, mi));
  if (mi > 0.0) out.emplace_back("cor2_lower", cor2_lower(d3z, alpha, s.n, mi));
  if (s.aux_loss) {
    try {
      out.emplace_back("v_n", v_n_exact(s));
    } catch (const CapExceeded&) {
      // Only Monte Carlo is available beyond the enumeration cap.
      const auto mc = v_n_monte_carlo(s, 10000, c.seed);
      out.emplace_back("v_n_monte_carlo", mc.estimate);
      out.emplace_back("v_n_monte_carlo_stderr", mc.standard_error);
    }
  }
  return out;
}

RunOutcome execute(const std::string& command, const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  const auto base = c.out_dir / c.stem;
  auto path = [&](const std::string& suffix) { return std::filesystem::path(base.string() + suffix); };
  std::vector<std::string> notes;

  auto emit_sweep = [&](const SweepResult& result, const std::string& title) {
    write_csv(result, path(".csv"));
    outcome.files.push_back(path(".csv"));
    if (c.svg) {
      emit_plot(result, path(".svg"), title);
      outcome.files.push_back(path(".svg"));
    }
    if (!result.converged()) {
      outcome.exit_code = kExitNonConvergence;
      notes.push_back("some solver points did not converge");
    }
    outcome.summary = std::to_string(result.rows.size()) + " rows x " + std::to_string(result.columns.size()) +
                      " bounds -> " + path(".csv").string();
  };

  if (command == "curve") {
    emit_sweep(run_curve(c), c.stem + ": bounds versus rate");
  } else if (command == "constrained") {
    emit_sweep(run_constrained_curve(c), c.stem + ": D2(r/n) with and without the auxiliary constraint");
  } else if (command == "misspec") {
    emit_sweep(run_misspec(c), c.stem + ": misspecification bounds versus gamma");
  } else if (command == "validate") {
    const auto report = run_validate(c);
    write_text(path(".validate.txt"), report.text());
    outcome.files.push_back(path(".validate.txt"));
    if (!report.passed()) outcome.exit_code = kExitValidationFailure;
    std::size_t failed = 0;
    for (const auto& k : report.checks) failed += k.passed ? 0 : 1;
    outcome.summary = std::to_string(report.checks.size()) + " checks, " + std::to_string(failed) + " failed";
    for (const auto& k : report.checks)
      if (!k.passed) outcome.summary += "\nFAIL " + k.instance + " " + k.name + " slack=" + fmt(k.slack());
  } else if (command == "learner") {
    const auto rows = run_learner(c);
    std::ostringstream csv;
    csv << "quantity,value,config_hash\n";
    for (const auto& [k, v] : rows) csv << k << "," << format_number(v) << "," << config_hash(c) << "\n";
    write_text(path(".learner.csv"), csv.str());
    outcome.files.push_back(path(".learner.csv"));
    outcome.summary = csv.str();
  } else {
    throw ConfigError("command", "unknown subcommand '" + command + "'");
  }

  write_text(path(".config.ini"), canonical_text(c));
  outcome.files.push_back(path(".config.ini"));
  Manifest manifest;
  manifest.command = command;
  manifest.config_hash = config_hash(c);
  manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest.files = outcome.files;
  manifest.notes = notes;
  write_manifest(manifest, path(".manifest.txt"));
  outcome.files.push_back(path(".manifest.txt"));
  return outcome;
}

}  // namespace genbound::experiments
