#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "clumpq/closedform.hpp"
#include "clumpq/clump.hpp"
#include "clumpq/model.hpp"

using namespace clumpq;

namespace {

double rel_gap(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300});
}

const std::vector<double> kGrid{0.05, 0.1, 0.15, 0.2, 0.25,
                                0.3,  0.35, 0.4,  0.45};

}  // namespace

TEST_CASE("block length one: the whole family in elementary form") {
  for (double p : kGrid) {
    const ModelParams params = make_params(p, 1);
    const double q = params.q;
    const double r = (p / q) * (p / q);

    for (int j = 0; j < 6; ++j) {
      CHECK(rel_gap(pi_closed(params, CycleOrder::RedFirst, j),
                    (q - p) / (q * q) * std::pow(r, j)) < 1e-13);
    }
    CHECK(rel_gap(pi_closed(params, CycleOrder::GreenFirst, 0), (q - p) / q) <
          1e-13);
    for (int j = 1; j < 6; ++j) {
      CHECK(rel_gap(pi_closed(params, CycleOrder::GreenFirst, j),
                    (q - p) / (p * q) * std::pow(r, j)) < 1e-13);
    }

    CHECK(rel_gap(amplitude_closed(params, CycleOrder::RedFirst),
                  (q - p) / (q * q)) < 1e-13);
    CHECK(rel_gap(amplitude_closed(params, CycleOrder::GreenFirst),
                  (q - p) / (p * q)) < 1e-13);

    CHECK(rel_gap(nu_closed(params, 0), 2.0 * p) < 1e-14);
    CHECK(nu_closed(params, -1) == 1.0);

    CHECK(rel_gap(epsilon1_closed(params),
                  p * (q - p) * (q - p) / (2.0 * q * q * q)) < 1e-13);
    CHECK(rel_gap(lambda_closed(params), q - p) < 1e-13);
  }
}

TEST_CASE("theta radicals square back to their polynomials") {
  for (double p : kGrid) {
    const ModelParams params = make_params(p, 2);
    const double q = params.q;
    const ThetaFamily th = theta_family(params);
    CHECK(rel_gap(th.theta1 * th.theta1, 1.0 + 4.0 * p * q) < 1e-15);
    CHECK(rel_gap(th.theta2 * th.theta2,
                  1.0 + 4.0 * p * q + 16.0 * p * p * q * q) < 1e-15);
  }
}

TEST_CASE("chi_2 over 4 is a perfect square") {
  for (double p : kGrid) {
    const ModelParams params = make_params(p, 2);
    const double q = params.q;
    const double theta = theta_family(params).theta1;
    const double root = (q - p) * (1.0 + (q - p) * theta);
    const double want = root * root / (32.0 * std::pow(q, 6));
    CHECK(rel_gap(chi(params) / 4.0, want) < 1e-12);
  }
}

TEST_CASE("chi_3 over 6 is a perfect square") {
  for (double p : kGrid) {
    const ModelParams params = make_params(p, 3);
    const double q = params.q;
    const double theta = theta_family(params).theta2;
    const ChiCoefficients co = chi_coefficients(params);
    const double d = q - p;
    const double root =
        d * co.u + d * d * d * theta +
        std::sqrt(2.0) * d * d * std::sqrt(co.v + co.u * theta);
    const double want = root * root / (288.0 * p * std::pow(q, 9));
    CHECK(rel_gap(chi(params) / 6.0, want) < 1e-12);
  }
}

TEST_CASE("epsilon1 is chi over twice the block length") {
  for (int ell : {2, 3}) {
    for (double p : kGrid) {
      const ModelParams params = make_params(p, ell);
      CHECK(rel_gap(epsilon1_closed(params), chi(params) / (2.0 * ell)) <
            1e-14);
    }
  }
}

TEST_CASE("hitting probabilities match an exact lattice solve") {
  // First-passage system solved in exact rational arithmetic (radius 40,
  // far beyond double rounding), evaluated to 25 digits. The radical
  // expressions must land on these to near machine precision.
  const ModelParams a = make_params(0.05, 3);
  CHECK(rel_gap(nu_closed(a, -3), 0.7509640195991692232720323) < 1e-13);
  const ModelParams b = make_params(0.1, 3);
  CHECK(rel_gap(nu_closed(b, -3), 0.612949525759091747623612) < 1e-13);
  const ModelParams c = make_params(0.15, 3);
  CHECK(rel_gap(nu_closed(c, -3), 0.5586397353544731876532282) < 1e-13);
  const ModelParams d = make_params(0.25, 3);
  CHECK(rel_gap(nu_closed(d, -3), 0.5832707308276231599179597) < 1e-13);
  const ModelParams e = make_params(0.3, 3);
  CHECK(rel_gap(nu_closed(e, -3), 0.6307252833285321827220391) < 1e-13);
}

TEST_CASE("radical hitting probabilities agree with the linear solve") {
  for (double p : kGrid) {
    {
      const ModelParams params = make_params(p, 2);
      const HitProbabilities hit = solve_hit_probs(params);
      CHECK(rel_gap(nu_closed(params, 0), hit.nu0) < 1e-10);
      CHECK(rel_gap(nu_closed(params, -1), hit.nu_neg[0]) < 1e-10);
      CHECK(rel_gap(nu_closed(params, -2), hit.nu_neg[1]) < 1e-10);
      CHECK(rel_gap(nu_closed(params, 1), hit.nu_pos[0]) < 1e-10);
    }
    {
      const ModelParams params = make_params(p, 3);
      const HitProbabilities hit = solve_hit_probs(params);
      CHECK(rel_gap(nu_closed(params, 0), hit.nu0) < 1e-10);
      for (int k = 1; k <= 3; ++k) {
        CHECK(rel_gap(nu_closed(params, -k), hit.nu_neg[k - 1]) < 1e-10);
      }
      CHECK(rel_gap(nu_closed(params, 1), hit.nu_pos[0]) < 1e-10);
      CHECK(rel_gap(nu_closed(params, 2), hit.nu_pos[1]) < 1e-10);
    }
  }
}

TEST_CASE("downhill-uphill reversal ties the two nu branches") {
  for (double p : kGrid) {
    for (int ell : {2, 3}) {
      const ModelParams params = make_params(p, ell);
      const double r = (p / params.q) * (p / params.q);
      const int kmax = ell - 1;
      for (int k = 1; k <= kmax; ++k) {
        CHECK(rel_gap(nu_closed(params, k),
                      nu_closed(params, -k) * std::pow(r, k)) < 1e-12);
      }
    }
  }
}

TEST_CASE("frozen radical values at reference points") {
  {
    const ModelParams params = make_params(0.3, 2);
    CHECK(rel_gap(theta_family(params).theta1, 1.3564659966250536) < 1e-14);
    CHECK(rel_gap(chi(params), 0.40452070094944165) < 1e-12);
    CHECK(rel_gap(pi_closed(params, CycleOrder::RedFirst, 0),
                  0.86924948219487352) < 1e-12);
    CHECK(rel_gap(pi_closed(params, CycleOrder::RedFirst, 1),
                  0.10330408904044681) < 1e-12);
    CHECK(rel_gap(amplitude_closed(params), 0.64247663417326928) < 1e-12);
    CHECK(rel_gap(lambda_closed(params), 0.62962710148980472) < 1e-12);
    CHECK(rel_gap(epsilon1_closed(params), 0.10113017523736029) < 1e-12);
    CHECK(rel_gap(nu_closed(params, 0), 0.38218399935715303) < 1e-12);
    CHECK(rel_gap(nu_closed(params, -1), 0.69188889781731844) < 1e-12);
    CHECK(rel_gap(nu_closed(params, -2), 0.80064185229472418) < 1e-12);
    CHECK(rel_gap(nu_closed(params, 1), 0.12708163429297686) < 1e-12);
  }
  {
    const ModelParams params = make_params(0.3, 3);
    CHECK(rel_gap(theta_family(params).theta2, 1.5954936540143305) < 1e-14);
    CHECK(rel_gap(chi(params), 0.96687966815794357) < 1e-12);
    CHECK(rel_gap(pi_closed(params, CycleOrder::RedFirst, 0),
                  0.90296090067836043) < 1e-12);
    CHECK(rel_gap(pi_closed(params, CycleOrder::RedFirst, 2),
                  0.018336936400373482) < 1e-12);
    CHECK(rel_gap(amplitude_closed(params), 0.53093230837935601) < 1e-12);
    CHECK(rel_gap(lambda_closed(params), 0.7804704933176555) < 1e-12);
    CHECK(rel_gap(epsilon1_closed(params), 0.16114661135965694) < 1e-12);
  }
  {
    // Small p leans hardest on the guarded radical cancellations.
    const ModelParams params = make_params(0.05, 3);
    CHECK(rel_gap(nu_closed(params, 0), 0.0021494803787330537) < 1e-11);
    CHECK(rel_gap(nu_closed(params, -3), 0.75096401959970382) < 1e-11);
    CHECK(rel_gap(lambda_closed(params), 1.0004519556258571) < 1e-11);
  }
}

TEST_CASE("unsupported radical indices are rejected") {
  CHECK_THROWS_AS(pi_closed(make_params(0.3, 2), CycleOrder::RedFirst, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(pi_closed(make_params(0.3, 2), CycleOrder::GreenFirst, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(pi_closed(make_params(0.3, 4), CycleOrder::RedFirst, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(nu_closed(make_params(0.3, 2), 2), std::invalid_argument);
  CHECK_THROWS_AS(nu_closed(make_params(0.3, 3), -4), std::invalid_argument);
  CHECK_THROWS_AS(nu_closed(make_params(0.3, 4), 0), std::invalid_argument);
  CHECK_THROWS_AS(chi(make_params(0.3, 1)), std::invalid_argument);
  CHECK_THROWS_AS(lambda_closed(make_params(0.3, 4)), std::invalid_argument);
  CHECK_THROWS_AS(epsilon1_closed(make_params(0.3, 4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(slot_walk_pi(make_params(0.3, 1), -1),
                  std::invalid_argument);
}

TEST_CASE("warm-up walk without the light") {
  for (double p : kGrid) {
    const ModelParams params = make_params(p, 1);
    const double q = params.q;
    const double rho = p / q;
    double total = 0.0;
    for (int j = 0; j < 40; ++j) {
      const double want = (1.0 - rho) * std::pow(rho, j);
      CHECK(rel_gap(slot_walk_pi(params, j), want) < 1e-13);
      total += slot_walk_pi(params, j);
    }
    CHECK(total < 1.0 + 1e-12);
    CHECK(rel_gap(slot_walk_epsilon(params), p * (q - p) * (q - p) / (q * q)) <
          1e-13);
  }
}
