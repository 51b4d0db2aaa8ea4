#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "genbound/coupling.hpp"
#include "genbound/errors.hpp"
#include "genbound/learners.hpp"
#include "oracles.hpp"

namespace gb = genbound;
namespace gt = genbound::testing;
using gb::LearnerSpec;

namespace {

gb::Scenario fig3_with_n(int n) {
  auto s = gb::preset_scenario("fig3");
  s.n = n;
  return s;
}

}  // namespace

TEST(LearnerSpec, ValidateAndDescribe) {
  EXPECT_NO_THROW(LearnerSpec::gibbs(2.0).validate(3));
  EXPECT_THROW(LearnerSpec::gibbs(-1.0).validate(3), std::invalid_argument);
  EXPECT_THROW(LearnerSpec::gibbs(INFINITY).validate(3), std::invalid_argument);
  EXPECT_THROW(LearnerSpec::constant(3).validate(3), std::invalid_argument);
  EXPECT_NE(LearnerSpec::gibbs(2.0).describe(), LearnerSpec::erm().describe());
}

TEST(EnumerateJoint, SampleEncoding) {
  const auto j = gb::enumerate_joint(gt::fig1_scenario(0.5, 0.5, 3), LearnerSpec::erm());
  EXPECT_EQ(j.datasets(), 8u);
  EXPECT_EQ(j.sample(6, 0), 0u);
  EXPECT_EQ(j.sample(6, 1), 1u);
  EXPECT_EQ(j.sample(6, 2), 1u);
  EXPECT_THROW(j.sample(6, 3), std::out_of_range);
  EXPECT_NEAR(j.table().sum(), 1.0, 1e-14);
}

TEST(EnumerateJoint, IndependentLearnersCarryNoInformation) {
  const auto s = gt::fig1_scenario(0.5, 0.3, 3);
  for (const auto& spec : {LearnerSpec::constant(1), LearnerSpec::gibbs(0.0)}) {
    const auto j = gb::enumerate_joint(s, spec);
    EXPECT_NEAR(gb::exact_mi(j), 0.0, 1e-14);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(gb::per_sample_mi(j, i), 0.0, 1e-14);
  }
  const auto c = gb::enumerate_joint(s, LearnerSpec::constant(1));
  EXPECT_NEAR(gb::exact_gen_error(c), gb::d3_zero(gb::FiniteDistribution::point_mass(2, 1), s), 1e-14);
  EXPECT_NEAR(gb::exact_gen_error(gb::enumerate_joint(gt::fig1_scenario(0.4, 0.4, 2), LearnerSpec::constant(0))),
              0.0, 1e-15);
}

TEST(EnumerateJoint, BijectiveLearnerHasFullInformation) {
  // One sample, ERM on loss w*z picks w = 0 always; use a mismatch loss so the choice copies z.
  auto s = gt::fig1_scenario(0.5, 0.5, 1);
  s.loss = gb::LossMatrix(gb::Matrix(2, 2, std::vector<double>{0, 1, 1, 0}));
  EXPECT_NEAR(gb::exact_mi(gb::enumerate_joint(s, LearnerSpec::erm())), std::numbers::ln2, 1e-14);
}

TEST(EnumerateJoint, MatchesDirectEnumeration) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto s = gt::random_scenario(rng, 2 + t % 2, 2 + (t / 2) % 2, 1 + t % 4);
    const auto spec = t % 3 == 0 ? LearnerSpec::erm() : LearnerSpec::gibbs(0.5 * (1 + t % 3));
    const auto j = gb::enumerate_joint(s, spec);
    const auto ref = gt::naive_learner_stats(s, spec, 0.2);
    EXPECT_NEAR(gb::exact_gen_error(j), ref.gen_error, 1e-12);
    EXPECT_NEAR(gb::exact_mi(j), ref.mi, 1e-12);
    EXPECT_NEAR(gb::empirical_tail(j, 0.2), ref.tail, 1e-12);
  }
}

TEST(EnumerateJoint, LargeBetaGibbsMatchesErm) {
  std::mt19937_64 rng(8);
  int compared = 0;
  for (int t = 0; t < 20 && compared < 8; ++t) {
    const auto s = gt::random_scenario(rng, 3, 2, 2);
    const auto erm = gb::enumerate_joint(s, LearnerSpec::erm());
    const auto gibbs = gb::enumerate_joint(s, LearnerSpec::gibbs(1e6));
    bool ties = false;
    for (std::size_t d = 0; d < erm.datasets(); ++d) {
      auto row = erm.empirical_risk().row(d);
      std::vector<double> sorted(row.begin(), row.end());
      std::sort(sorted.begin(), sorted.end());
      if (sorted[1] - sorted[0] < 1e-3) ties = true;
    }
    if (ties) continue;
    ++compared;
    for (std::size_t k = 0; k < erm.table().data().size(); ++k)
      EXPECT_NEAR(erm.table().data()[k], gibbs.table().data()[k], 1e-12);
  }
  EXPECT_GT(compared, 0);
}

TEST(EnumerateJoint, PerSampleMiBoundsAndCap) {
  const auto s = gt::fig1_scenario(0.5, 0.4, 3);
  const auto j = gb::enumerate_joint(s, LearnerSpec::gibbs(2.0));
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) sum += gb::per_sample_mi(j, i);
  EXPECT_LE(sum, gb::exact_mi(j) + 1e-12);
  EXPECT_THROW(gb::per_sample_mi(j, 3), std::out_of_range);
  EXPECT_THROW(gb::enumerate_joint(gt::fig1_scenario(0.5, 0.5, 20), LearnerSpec::erm()), gb::CapExceeded);
  EXPECT_THROW(gb::enumerate_joint(s, LearnerSpec::constant(5)), std::invalid_argument);
}

TEST(EmpiricalTail, Limits) {
  const auto j = gb::enumerate_joint(gt::fig1_scenario(0.5, 0.5, 3), LearnerSpec::gibbs(1.0));
  EXPECT_DOUBLE_EQ(gb::empirical_tail(j, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(gb::empirical_tail(j, 2.0), 0.0);
  EXPECT_THROW(gb::empirical_tail(j, -0.1), std::invalid_argument);
  double last = 1.0;
  for (int i = 0; i <= 20; ++i) {
    const double v = gb::empirical_tail(j, 0.05 * i);
    EXPECT_LE(v, last);
    last = v;
  }
}

TEST(VN, ExactValues) {
  EXPECT_NEAR(gb::v_n_exact(fig3_with_n(10)), gt::anchors::kV10, 1e-12);
  auto one = fig3_with_n(1);
  one.train_dist = gb::FiniteDistribution::bernoulli(0.3);
  EXPECT_NEAR(gb::v_n_exact(one), -1.0, 1e-15);
  auto s = fig3_with_n(4);
  s.aux_loss = gb::LossMatrix(gb::Matrix(2, 2, 0.4));
  EXPECT_NEAR(gb::v_n_exact(s), 0.4, 1e-15);
  EXPECT_THROW(gb::v_n_exact(gt::fig1_scenario()), std::invalid_argument);
}

TEST(VN, MatchesDatasetEnumeration) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto s = gt::random_scenario(rng, 2 + t % 3, 2 + t % 2, 1 + t % 5);
    gb::Matrix aux(s.hypotheses(), s.instances());
    for (auto& v : aux.data()) v = u(rng);
    s.aux_loss = gb::LossMatrix(aux);
    EXPECT_NEAR(gb::v_n_exact(s), gt::naive_v_n(s), 1e-12);
  }
}

TEST(VN, MonteCarloAgreesAndIsDeterministic) {
  const auto s = fig3_with_n(10);
  const auto est = gb::v_n_monte_carlo(s, 100000, 42);
  EXPECT_LT(std::abs(est.estimate - gt::anchors::kV10), 0.01);
  EXPECT_DOUBLE_EQ(est.sensitivity, 1.0);
  EXPECT_GT(est.standard_error, 0.0);
  EXPECT_LT(std::abs(est.estimate - gt::anchors::kV10), est.estimator_margin(1e-6));
  const auto again = gb::v_n_monte_carlo(s, 100000, 42);
  EXPECT_EQ(est.estimate, again.estimate);
  EXPECT_NE(est.estimate, gb::v_n_monte_carlo(s, 100000, 43).estimate);
  EXPECT_THROW(gb::v_n_monte_carlo(s, 0, 1), std::invalid_argument);
  EXPECT_THROW(est.single_dataset_margin(0.0), std::invalid_argument);
  EXPECT_NEAR(est.single_dataset_margin(0.1), std::sqrt(std::log(20.0) / 20.0), 1e-12);
}

TEST(VN, PointMassMonteCarloIsExact) {
  auto s = fig3_with_n(5);
  s.train_dist = gb::FiniteDistribution::point_mass(2, 1);
  const auto est = gb::v_n_monte_carlo(s, 1000, 9);
  EXPECT_DOUBLE_EQ(est.estimate, gb::v_n_exact(s));
  EXPECT_GT(est.estimator_margin(0.05), 0.0);
}

TEST(CounterUniform, RangeAndReproducibility) {
  double mean = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = gb::counter_uniform(1, 2, i);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    mean += u;
  }
  EXPECT_NEAR(mean / 10000, 0.5, 0.02);
  EXPECT_EQ(gb::counter_uniform(5, 6, 7), gb::counter_uniform(5, 6, 7));
  EXPECT_NE(gb::counter_uniform(5, 6, 7), gb::counter_uniform(5, 7, 7));
}
