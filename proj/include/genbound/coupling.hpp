#pragma once

#include "genbound/matrix.hpp"
#include "genbound/measures.hpp"
#include "genbound/scenario.hpp"

namespace genbound {

/// Joint law pi(w, z) with prescribed marginals.
struct Coupling {
  Matrix mass;
  FiniteDistribution row_target;
  FiniteDistribution col_target;

  /// P[row index != column index]; meaningful when both sides share an alphabet.
  double mismatch_probability() const;
  /// Largest absolute deviation of either marginal from its target.
  double marginal_error() const;
};

/// D3(0, {pw}) = E_pw[L_mu(W)] - E_pw[L_mu'(W)], the independent-coupling gap.
double d3_zero(const FiniteDistribution& pw, const Scenario& s);

struct EntropicSolution {
  double epsilon;
  double rate;   // I of the coupling, nats
  double value;  // E_pi[cost]
  Matrix plan;   // over the full (unreduced) alphabets
  bool converged;
};

/// min E_pi[cost] + eps * D(pi || rows ⊗ cols) over couplings of (rows, cols).
/// Zero atoms are dropped before solving and reinserted as zero rows/columns.
EntropicSolution entropic_coupling(const FiniteDistribution& rows, const FiniteDistribution& cols,
                                   const Matrix& cost, double epsilon);

struct TransportPlan {
  double value;
  Matrix plan;
};

/// Exact minimum-cost transport between two finite laws (successive shortest paths).
TransportPlan optimal_transport(const FiniteDistribution& rows, const FiniteDistribution& cols, const Matrix& cost);

struct D4Result {
  double value;
  double epsilon;  // multiplier of the bracketing entropic solution (0: transport optimum)
  bool converged;
};

/// D4(r) for one output law: min over couplings of (pw, mu') with I <= r of E[g].
/// The returned value is a dual (tangent) bound, never above the true minimum
/// up to solver accuracy.
D4Result d4(const FiniteDistribution& pw, const Scenario& s, double rate);
double d4_at(const FiniteDistribution& pw, const Scenario& s, double rate);

/// Exact transport minimum by enumerating basic feasible solutions (spanning
/// trees of the bipartite support graph). Both alphabets must have size <= 4.
double ot_brute_force(const FiniteDistribution& pw, const FiniteDistribution& pz, const Matrix& cost);

/// Coupling attaining P[Z != Z'] = TV(p, q).
Coupling maximal_coupling(const FiniteDistribution& p, const FiniteDistribution& q);

}  // namespace genbound
