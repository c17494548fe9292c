#pragma once

#include <vector>

#include "clumpq/model.hpp"
#include "clumpq/poly.hpp"

namespace clumpq {

// How many stationary probabilities pi_j the solvers materialize.
inline constexpr int kPiWindow = 80;

// Stationary description of the sampled queue chain. boundary holds the
// solved unknowns pi_0..pi_{ell-1}; everything at or above level ell is
// carried by the rational generating function N(z) / Dred(z), with the
// shared (1 - z) factor already cancelled from both polynomials.
struct StationarySolution {
  int ell = 1;
  CycleOrder order = CycleOrder::RedFirst;
  std::vector<double> boundary;
  double tail_amplitude = 0.0;  // A with pi_j ~ A (p^2/q^2)^j
  double decay = 0.0;           // p^2/q^2
  double tail_mass = 0.0;       // sum of pi_j over j >= ell
  std::vector<double> pi_vector;            // pi_0..pi_{kPiWindow-1}
  std::vector<double> numerator;            // N(z) coefficients
  std::vector<double> reduced_denominator;  // D(z)/(1 - z) coefficients
};

// Direct stationary solve of the truncated kernel, kept independent of the
// generating-function route so the two can cross-check each other. Uses the
// GTH elimination so even pi_j of order 1e-40 keep componentwise accuracy.
// Rows that lose mass to the truncation get the deficit folded into their
// last column. Requires truncation >= 50.
std::vector<double> stationary_oracle(const KernelMatrix& kernel);

// Solves for the boundary probabilities by forcing the generating-function
// numerator to vanish at every inside root and normalizing total mass to 1.
StationarySolution solve_boundary(const ModelParams& params, CycleOrder order,
                                  const RootClassification& classification);

// A = -N(z*) / (z* Dred'(z*)) at the geometric root z* = q^2/p^2.
double tail_amplitude(const ModelParams& params,
                      const StationarySolution& solution,
                      const RootClassification& classification);

// Partial-fraction reconstruction of pi_j from the stored rational form,
// summing residues at the geometric and outside roots. Valid for
// j >= ell + 1 (below that the polynomial part of N/Dred contributes).
double stationary_tail(const StationarySolution& solution,
                       const RootClassification& classification, int j);

}  // namespace clumpq
