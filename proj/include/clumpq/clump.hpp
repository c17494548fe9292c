#pragma once

#include <cstdint>
#include <vector>

#include "clumpq/gfsolver.hpp"
#include "clumpq/model.hpp"
#include "clumpq/poly.hpp"

namespace clumpq {

// Hitting probabilities of the free aggregated walk (one step per cycle,
// increments in [-ell, ell]): nu_j = P(walk started at position -j ever
// lands exactly on 0). Index 0 is the return probability from 0 itself,
// counting an immediate zero-increment cycle as a return.
struct HitProbabilities {
  int ell = 1;
  double nu0 = 0.0;
  std::vector<double> nu_neg;  // nu_{-1}..nu_{-ell}, starts above 0
  std::vector<double> nu_pos;  // nu_{1}..nu_{ell}, starts below 0

  double at(int j) const;
};

HitProbabilities solve_hit_probs(const ModelParams& params);

// Monte Carlo estimate of nu_{j_index} on the free walk; the walk starts
// at position -j_index and is followed for at most `horizon` cycles.
struct SojournEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long long trials = 0;
};

SojournEstimate sojourn_oracle(const ModelParams& params, int j_index,
                               long long trials, long long horizon,
                               std::uint64_t seed);

// Dense first-passage solve for the same probabilities on the lattice
// truncated to [-radius, radius]; paths leaving the window count as misses,
// which costs less than 1e-12 at radius 200. Independent of the
// generating-function route, so the two can cross-check each other.
HitProbabilities hit_probs_oracle(const ModelParams& params, int radius = 200);

// Clump rates in units of pi_j: lambdas[i] = lambda_{-i}/pi_j for the
// absorbing levels 0, -1, ..., -(ell-1). epsilon is the exponential
// coefficient of the maximum law, P{M_n <= m} = exp(-epsilon n r^m).
struct ClumpSolution {
  int ell = 1;
  std::vector<double> lambdas;
  double lambda_over_pi = 0.0;
  double epsilon = 0.0;           // epsilon_1
  double expected_sojourn = 0.0;  // E(C) = 1/(1 - nu0)
  bool extrapolated = false;      // prefactor pattern unproven for ell >= 4
};

ClumpSolution solve_clump_system(const ModelParams& params,
                                 const HitProbabilities& hit,
                                 double tail_amplitude);

// Both sides of lambda/pi_j = ell q^2 A(p), computed through the full
// numeric pipeline. Exact for ell in {2,3}; a conjecture beyond that.
struct ConjectureCheck {
  double lhs = 0.0;  // lambda/pi_j from the clump system
  double rhs = 0.0;  // ell q^2 A(p) from the tail amplitude
  double rel_gap = 0.0;
  bool extrapolated = false;
};

ConjectureCheck conjecture_ratio(const ModelParams& params);

// Predicted law of the maximum over n slots.
struct MaxPrediction {
  long long n = 0;
  int m_lo = 0;
  int m_hi = 0;
  std::vector<double> cdf;  // cdf[i] = P{M_n <= m_lo + i}
  int mode_lo = 0;          // cdf in [0.01, 0.99] for m in [mode_lo, mode_hi]
  int mode_hi = 0;
  double epsilon = 0.0;
  double decay = 0.0;
  bool extrapolated = false;
};

// m_lo/m_hi = -1 select the range where the cdf crosses [0.001, 0.999].
MaxPrediction predict_max_cdf(const ModelParams& params, long long n,
                              int m_lo = -1, int m_hi = -1);

// epsilon_0 (cycle-start subwalk) and epsilon_1 (mid-cycle subwalk, the one
// governing the full maximum). The two come from independent boundary
// solves of the two cycle orders; their ratio must equal (p/q)^ell.
struct EpsilonPair {
  double eps0 = 0.0;
  double eps1 = 0.0;
};

EpsilonPair epsilon_pair(const ModelParams& params);

}  // namespace clumpq
