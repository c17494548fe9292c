#pragma once

#include "clumpq/model.hpp"

namespace clumpq {

// Discriminant-style radicals shared by the ell = 2 and ell = 3 formulas.
struct ThetaFamily {
  double theta1 = 0.0;  // sqrt(1 + 4pq), used at ell = 2
  double theta2 = 0.0;  // sqrt(1 + 4pq + 16 p^2 q^2), used at ell = 3
};

ThetaFamily theta_family(const ModelParams& params);

// The chi polynomials and their auxiliary factors. chi2/chi3 govern the
// exponential coefficient of the maximum law via epsilon1 = chi_ell / (2 ell).
struct ChiCoefficients {
  double chi2 = 0.0;
  double chi3 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double u = 0.0;
  double v = 0.0;
};

ChiCoefficients chi_coefficients(const ModelParams& params);

// Boundary stationary probabilities in radical form. Supported:
// ell = 1 any j >= 0 (both cycle orders), ell = 2 j in {0,1} and ell = 3
// j in {0,1,2} (RedFirst only). Everything else throws invalid_argument.
double pi_closed(const ModelParams& params, CycleOrder order, int j);

// Hitting probabilities nu_j in radical form. Supported index sets:
// ell = 1: {0, -1}; ell = 2: {0, -1, -2, 1}; ell = 3: {0, -1, -2, -3, 1, 2}.
double nu_closed(const ModelParams& params, int j);

// chi_ell(p) for ell in {2, 3}.
double chi(const ModelParams& params);

// Tail amplitude A(p). ell = 1 supports both orders; ell in {2, 3} has a
// published form for RedFirst only.
double amplitude_closed(const ModelParams& params,
                        CycleOrder order = CycleOrder::RedFirst);

// Clump rate per unit pi_j, lambda / pi_j, for ell in {1, 2, 3}.
double lambda_closed(const ModelParams& params);

// Exponential coefficient epsilon1 of P{M_n <= m} for ell in {1, 2, 3}.
double epsilon1_closed(const ModelParams& params);

// The warm-up walk without light periodicity (every slot +1 w.p. p, else
// -1 with reflection): its stationary law and maximum coefficient.
double slot_walk_pi(const ModelParams& params, int j);
double slot_walk_epsilon(const ModelParams& params);

}  // namespace clumpq
