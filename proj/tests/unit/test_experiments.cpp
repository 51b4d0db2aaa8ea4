#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "genbound/bounds.hpp"
#include "genbound/errors.hpp"
#include "genbound/experiments/config.hpp"
#include "genbound/experiments/output.hpp"
#include "genbound/experiments/runners.hpp"
#include "genbound/rd_solver.hpp"
#include "oracles.hpp"

namespace gb = genbound;
namespace ex = genbound::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("genbound_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

constexpr const char* kInline = R"(
[scenario]
hypotheses = 0 1
instances = 0 1
loss = product
test_dist = bernoulli(0.5)
train_dist = 0.5 0.5

[sweep]
r = 0 0.1 0.2

[bounds]
list = d2, xu_raginsky
)";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GENBOUND_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesInlineScenario) {
  const auto cfg = ex::parse_config(kInline);
  EXPECT_EQ(cfg.scenario.hypotheses(), 2u);
  EXPECT_DOUBLE_EQ(cfg.scenario.loss(1, 1), 1.0);
  EXPECT_EQ(cfg.rates, (std::vector<double>{0.0, 0.1, 0.2}));
  EXPECT_EQ(cfg.bounds, (std::vector<std::string>{"d2", "xu_raginsky"}));
  EXPECT_DOUBLE_EQ(cfg.effective_sigma2(), 0.25);
  EXPECT_DOUBLE_EQ(cfg.effective_gamma(), 0.0);
}

TEST(Config, PresetActsAsBase) {
  const auto cfg = ex::parse_config("[scenario]\npreset = fig1\ntrain_dist = bernoulli(0.25)\nn = 4\n"
                                    "[sweep]\nr_min = 0\nr_max = 1\npoints = 5\n");
  EXPECT_DOUBLE_EQ(cfg.scenario.train_dist[1], 0.25);
  EXPECT_EQ(cfg.scenario.n, 4);
  EXPECT_EQ(cfg.rates.size(), 5u);
  EXPECT_DOUBLE_EQ(cfg.rates.back(), 1.0);
  EXPECT_NEAR(cfg.effective_gamma(), gb::kl_divergence(gb::FiniteDistribution::bernoulli(0.25),
                                                       gb::FiniteDistribution::bernoulli(0.5)), 1e-15);
}

TEST(Config, ErrorsNameFieldAndLine) {
  try {
    ex::parse_config("[scenario]\npreset = fig1\nbogus = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const gb::ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(ex::parse_config("[nosuch]\nx = 1\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[sweep]\nr = 0.2 0.1\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[sweep]\nr = -1\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[sweep]\nr = 0.1 abc\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[scenario]\npreset = fig1\nloss = 3 2 : 0 0 0 0 0 0\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[scenario]\npreset = fig1\ntest_dist = bernoulli(1.5)\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[scenario]\npreset = fig1\nloss = no_such_loss\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[output]\nunit = furlongs\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[learner]\nkind = gibbs\nbeta = -2\n"), gb::ConfigError);
  EXPECT_THROW(ex::parse_config("[bounds]\nlist = \n"), gb::ConfigError);
  EXPECT_THROW(ex::load_config("/nonexistent/genbound.ini"), gb::ConfigError);
}

TEST(Config, CanonicalTextRoundTrips) {
  for (const char* fig : {"fig1", "fig3", "fig4"}) {
    auto cfg = ex::preset_config(fig);
    cfg.seed = 99;
    const auto text = ex::canonical_text(cfg);
    const auto back = ex::parse_config(text);
    EXPECT_EQ(ex::canonical_text(back), text);
    EXPECT_EQ(ex::config_hash(back), ex::config_hash(cfg));
    EXPECT_EQ(ex::config_hash(cfg).size(), 16u);
  }
  auto a = ex::preset_config("fig1"), b = a;
  b.threads = 4;
  b.out_dir = "/elsewhere";
  EXPECT_EQ(ex::config_hash(a), ex::config_hash(b));
  b.seed = 1;
  EXPECT_NE(ex::config_hash(a), ex::config_hash(b));
}

TEST(Config, Presets) {
  const auto f1 = ex::preset_config("fig1");
  EXPECT_TRUE(f1.mu_sweep);
  EXPECT_EQ(f1.mu_grid, 201);
  EXPECT_EQ(f1.rates.size(), 50u);
  EXPECT_DOUBLE_EQ(f1.rates.back(), 1.5);
  const auto f3 = ex::preset_config("fig3");
  EXPECT_EQ(f3.scenario.n, 10);
  EXPECT_DOUBLE_EQ(f3.rates.back() / f3.scenario.n, 1.5);
  EXPECT_THROW(ex::preset_config("fig5"), gb::ConfigError);
}

TEST(Config, RandomTinyScenariosAreSeeded) {
  for (int i = 0; i < 10; ++i) {
    const auto s = ex::random_tiny_scenario(7, i, 5, 3);
    EXPECT_EQ(s.instances(), 2u);
    EXPECT_LE(s.hypotheses(), 3u);
    EXPECT_LE(s.n, 5);
    EXPECT_GT(s.train_dist[0], 0.0);
    EXPECT_GT(s.test_dist[1], 0.0);
    EXPECT_EQ(s.loss.values(), ex::random_tiny_scenario(7, i, 5, 3).loss.values());
  }
}

TEST(Output, CsvFormat) {
  ex::SweepResult r;
  r.columns = {"a", "b"};
  r.config_hash = "0123456789abcdef";
  r.rows = {{0.0, {1.0, 0.5}, {}}, {std::numbers::ln2, {NAN, 2.0}, {"a:infeasible"}}};
  const auto text = ex::csv_text(r);
  const auto ls = lines(text);
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls[0], "r_nats,a,b,flags,config_hash");
  EXPECT_EQ(ls[1], "0,1,0.5,ok,0123456789abcdef");
  EXPECT_EQ(ls[2], "0.69314718056,nan,2,a:infeasible,0123456789abcdef");
  r.unit = ex::Unit::Bits;
  EXPECT_EQ(lines(ex::csv_text(r))[2].substr(0, 2), "1,");
  EXPECT_EQ(ex::format_number(-0.0), "0");
  EXPECT_EQ(ex::format_number(INFINITY), "inf");
  r.rows[0].values.pop_back();
  EXPECT_THROW(ex::csv_text(r), std::logic_error);
}

TEST(Output, SvgSeriesBreakAndDeterminism) {
  ex::SweepResult r;
  r.columns = {"upper", "lower"};
  for (int i = 0; i < 5; ++i) r.rows.push_back({0.1 * i, {0.1 * i, 0.05 * i}, {}});
  r.rows[2].flags = {"lower:vacuous"};
  const auto svg = ex::svg_text(r, "t");
  EXPECT_EQ(svg, ex::svg_text(r, "t"));
  EXPECT_NE(svg.find("data-series=\"upper\""), std::string::npos);
  const auto at = svg.find("data-series=\"lower\"");
  ASSERT_NE(at, std::string::npos);
  const auto start = svg.rfind("<path d=\"", at);
  const std::string path = svg.substr(start, at - start);
  EXPECT_EQ(std::count(path.begin(), path.end(), 'M'), 2);
  EXPECT_NE(svg.find("r (nats)"), std::string::npos);
  EXPECT_THROW(ex::svg_text(ex::SweepResult{}, "t"), std::invalid_argument);
}

TEST(Output, WriteTextFailsOnUnwritablePath) {
  const auto dir = scratch_dir("unwritable");
  const auto blocker = dir / "file";
  ex::write_text(blocker, "x");
  EXPECT_THROW(ex::write_text(blocker / "child.csv", "y"), std::runtime_error);
}

TEST(Runners, CurveBoundsAndUnits) {
  auto cfg = ex::parse_config(kInline);
  const auto r = ex::run_curve(cfg);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    EXPECT_LE(row.values[0], row.values[1] + 1e-12);
    EXPECT_NEAR(row.values[1], gb::xu_raginsky(0.25, 1, row.x), 1e-15);
  }
  EXPECT_NEAR(r.rows[2].values[0], genbound::testing::anchors::kFig1D2At02, 1e-7);
  EXPECT_LT(r.rows[2].values[0], r.rows[2].values[1]);
  cfg.unit = ex::Unit::Bits;
  const auto bits = ex::run_curve(cfg);
  EXPECT_EQ(bits.rows[2].values, r.rows[2].values);
  EXPECT_EQ(bits.x_header(), "r_bits");
  cfg.bounds.clear();
  EXPECT_THROW(ex::run_curve(cfg), gb::ConfigError);
  cfg.bounds = {"nope"};
  EXPECT_THROW(ex::run_curve(cfg), gb::ConfigError);
  cfg.bounds = {"d2_constrained"};
  EXPECT_THROW(ex::run_curve(cfg), gb::ConfigError);
}

TEST(Runners, MaxOverMuUsesWorstBernoulli) {
  auto cfg = ex::parse_config(kInline);
  cfg.mu_sweep = true;
  cfg.mu_grid = 11;
  cfg.rates = {0.2};
  cfg.bounds = {"d2_max_mu", "d2"};
  const auto r = ex::run_curve(cfg);
  EXPECT_GE(r.rows[0].values[0], r.rows[0].values[1] - 1e-9);
  EXPECT_LE(r.rows[0].values[0], std::sqrt(0.1) + 1e-12);
}

TEST(Runners, ConstrainedWithConstantAuxGivesEqualColumns) {
  auto cfg = ex::preset_config("fig3");
  cfg.scenario.aux_loss = gb::LossMatrix(gb::Matrix(2, 2, -0.5));
  cfg.rates = {0.0, 1.0, 3.0};
  const auto r = ex::run_constrained_curve(cfg);
  for (const auto& row : r.rows) EXPECT_NEAR(row.values[0], row.values[1], 1e-9);
}

TEST(Runners, ConstrainedFig3IsBelowD2Somewhere) {
  auto cfg = ex::preset_config("fig3");
  cfg.rates = {0.0, 1.0, 3.0};
  const auto r = ex::run_constrained_curve(cfg);
  bool strict = false;
  for (const auto& row : r.rows) {
    EXPECT_LE(row.values[1], row.values[0] + 1e-8);
    strict = strict || row.values[1] < row.values[0] - 1e-3;
  }
  EXPECT_TRUE(strict);
}

TEST(Runners, ValidateSuitePassesAndCorruptionFails) {
  ex::ExperimentConfig cfg;
  cfg.validate.scenarios = 4;
  const auto ok = ex::run_validate(cfg);
  EXPECT_TRUE(ok.passed()) << ok.text();
  EXPECT_GT(ok.checks.size(), 20u);
  cfg.validate.corrupt = "gen<=d2_upper";
  const auto bad = ex::run_validate(cfg);
  EXPECT_FALSE(bad.passed());
  EXPECT_FALSE(bad.failing_instances.empty());
  EXPECT_NE(bad.text().find("gen<=d2_upper"), std::string::npos);
}

TEST(Runners, ValidateConfigSuiteWithConstantLearner) {
  auto cfg = ex::preset_config("fig1");
  cfg.scenario.n = 2;
  cfg.learner = gb::LearnerSpec::constant(1);
  cfg.validate.suite = "config";
  const auto report = ex::run_validate(cfg);
  EXPECT_TRUE(report.passed()) << report.text();
}

TEST(Runners, Misspec) {
  ex::ExperimentConfig cfg;
  cfg.misspec.gammas = {0.0, 0.01, 0.05};
  const auto r = ex::run_misspec(cfg);
  EXPECT_EQ(r.x_name, "gamma");
  EXPECT_EQ(r.columns.size(), 4u);
  EXPECT_DOUBLE_EQ(r.rows[0].values[0], cfg.misspec.eps_base);
  const auto inv = std::find(r.columns.begin(), r.columns.end(), "bound_b[inv_sqrt_n]") - r.columns.begin();
  const auto inva = std::find(r.columns.begin(), r.columns.end(), "bound_a[inv_sqrt_n]") - r.columns.begin();
  ASSERT_LT(inv, 4);
  ASSERT_LT(inva, 4);
  EXPECT_LT(r.rows[1].values[inv], r.rows[1].values[inva]);
}

TEST(Runners, LearnerReport) {
  auto cfg = ex::preset_config("fig1");
  cfg.scenario.n = 3;
  cfg.learner = gb::LearnerSpec::gibbs(1.0);
  const auto kv = ex::run_learner(cfg);
  auto find = [&](const std::string& k) {
    for (const auto& [key, v] : kv)
      if (key == k) return v;
    ADD_FAILURE() << "missing " << k;
    return std::nan("");
  };
  const auto ref = genbound::testing::naive_learner_stats(cfg.scenario, cfg.learner, 0.0);
  EXPECT_NEAR(find("gen_error"), ref.gen_error, 1e-12);
  EXPECT_NEAR(find("mutual_information"), ref.mi, 1e-12);
}

TEST(Runners, ParallelForPreservesOrderAndErrors) {
  std::vector<int> out(100);
  ex::parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(ex::parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Runners, ThreadCountDoesNotChangeResults) {
  auto cfg = ex::parse_config(kInline);
  cfg.threads = 1;
  const auto one = ex::csv_text(ex::run_curve(cfg));
  cfg.threads = 3;
  EXPECT_EQ(ex::csv_text(ex::run_curve(cfg)), one);
}

TEST(Execute, WritesArtifactsAndEchoesHash) {
  auto cfg = ex::parse_config(kInline);
  cfg.out_dir = scratch_dir("execute");
  cfg.stem = "t";
  cfg.svg = true;
  const auto out = ex::execute("curve", cfg);
  EXPECT_EQ(out.exit_code, ex::kExitOk);
  for (const char* f : {"t.csv", "t.svg", "t.config.ini", "t.manifest.txt"}) EXPECT_TRUE(fs::exists(cfg.out_dir / f)) << f;
  const auto hash = ex::config_hash(cfg);
  const auto csv = lines(slurp(cfg.out_dir / "t.csv"));
  for (std::size_t i = 1; i < csv.size(); ++i) EXPECT_EQ(csv[i].substr(csv[i].size() - 16), hash);
  EXPECT_NE(slurp(cfg.out_dir / "t.manifest.txt").find(hash), std::string::npos);
  // Re-running from the echoed config reproduces the rows.
  auto again = ex::load_config(cfg.out_dir / "t.config.ini");
  again.out_dir = cfg.out_dir / "again";
  ex::execute("curve", again);
  EXPECT_EQ(slurp(again.out_dir / "t.csv"), slurp(cfg.out_dir / "t.csv"));
  EXPECT_THROW(ex::execute("dance", cfg), gb::ConfigError);
}

TEST(Execute, ValidationFailureExitCode) {
  ex::ExperimentConfig cfg;
  cfg.out_dir = scratch_dir("validate");
  cfg.validate.scenarios = 2;
  cfg.validate.corrupt = "d2_upper<=cor1_upper";
  EXPECT_EQ(ex::execute("validate", cfg).exit_code, ex::kExitValidationFailure);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("reproduce fig9"), ex::kExitConfigError);
  EXPECT_EQ(run_cli("frobnicate"), ex::kExitConfigError);
  ex::write_text(dir / "bad.ini", "[scenario]\nbogus = 1\n");
  EXPECT_EQ(run_cli("curve --config " + (dir / "bad.ini").string()), ex::kExitConfigError);
  ex::write_text(dir / "good.ini", kInline);
  EXPECT_EQ(run_cli("curve --config " + (dir / "good.ini").string() + " --out " + dir.string()), ex::kExitOk);
  EXPECT_TRUE(fs::exists(dir / "run.csv"));
  ex::write_text(dir / "misspec.ini", "[misspec]\ngammas = 0.001 0.01\n");
  EXPECT_EQ(run_cli("misspec --config " + (dir / "misspec.ini").string() + " --out " + dir.string()), ex::kExitOk);
}
