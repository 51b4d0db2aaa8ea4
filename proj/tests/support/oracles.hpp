#pragma once

// Reference implementations used only by the tests. They are written as
// plain loops over the definitions and share no code with the library
// beyond the value types.

#include <cstdint>
#include <random>
#include <vector>

#include "genbound/learners.hpp"
#include "genbound/matrix.hpp"
#include "genbound/measures.hpp"
#include "genbound/scenario.hpp"

namespace genbound::testing {

// Values computed with tests/oracles/anchors.py.
namespace anchors {
inline constexpr double kKlHalfQuarter = 0.14384103622589;
inline constexpr double kRenyi2HalfQuarter = 0.287682072451781;
inline constexpr double kBscMi = 0.368064207168497;
inline constexpr double kXuRaginskyLn2 = 0.588705011257737;
inline constexpr double kTail = 1.15554970388383e-7;
inline constexpr double kErmBound = 0.40440012414344;
inline constexpr double kMisspecG = 2.82842712474619;
inline constexpr double kMisspecF = 1.46773948230456;
inline constexpr double kCor2Penalty = 0.0141776091091385;
inline constexpr double kV10 = -0.623046875;
inline constexpr double kFig1D2At005 = 0.07839079918261499;
inline constexpr double kFig1D2At02 = 0.1525864186149806;
inline constexpr double kFig1D2At05 = 0.22590562707831974;
inline constexpr double kFig1D1N2At01 = 0.07629320930745731;
inline constexpr double kD4Bern03At005 = -0.071351;
}  // namespace anchors

double naive_kl(const std::vector<double>& p, const std::vector<double>& q);
double naive_renyi(const std::vector<double>& p, const std::vector<double>& q, double alpha);
double naive_chi2(const std::vector<double>& p, const std::vector<double>& q);
double naive_mi(const Matrix& joint);

/// Random full-support law with every mass at least `floor`.
std::vector<double> random_probs(std::mt19937_64& rng, std::size_t size, double floor = 0.02);
/// Random channel with full-support rows.
Matrix random_channel(std::mt19937_64& rng, std::size_t rows, std::size_t cols);

/// Scenario on {0,1} instances with loss w*z and Bernoulli test/train laws.
Scenario fig1_scenario(double test_p = 0.5, double train_p = 0.5, int n = 1);

/// Random scenario with |W| x |Z| losses in [0, 1] and full-support laws.
Scenario random_scenario(std::mt19937_64& rng, std::size_t hypotheses, std::size_t instances, int n = 1);

/// Gen error, mutual information and tail probability by direct enumeration of datasets.
struct NaiveLearnerStats {
  double gen_error = 0.0;
  double mi = 0.0;
  double tail = 0.0;
};
NaiveLearnerStats naive_learner_stats(const Scenario& s, const LearnerSpec& learner, double eta);

/// E min_w (1/n) sum_i aux(w, Z'_i) by enumerating every dataset.
double naive_v_n(const Scenario& s);

/// max over channels of E[gain] - I / slope, from a fine grid on binary inputs (2 x 2 only).
double grid_lagrangian_2x2(const std::vector<double>& input, const Matrix& gain_wx, double slope, int steps);

}  // namespace genbound::testing
