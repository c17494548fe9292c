#include "clumpq/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "clumpq/closedform.hpp"
#include "clumpq/clump.hpp"
#include "clumpq/errors.hpp"
#include "clumpq/gfsolver.hpp"
#include "clumpq/montecarlo.hpp"
#include "clumpq/poly.hpp"

namespace clumpq {

namespace {

constexpr const char* kClosed = "closed-form";
constexpr const char* kSolver = "gf-solver";
constexpr const char* kOracle = "oracle";
constexpr const char* kMonteCarlo = "monte-carlo";

void stamp(Report& rep, const ModelParams& params) {
  rep.meta_str("version", kVersion);
  rep.meta_num("p", params.p);
  rep.meta_num("q", params.q);
  rep.meta_int("ell", params.ell);
}

double rel_gap(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

std::string pkey(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", p);
  return buf;
}

// Runs fn(0..count-1) on up to thread_cap() workers. Callers write results
// into per-index slots, so the aggregation order stays deterministic.
void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(thread_cap(), count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

StationarySolution solve_order(const ModelParams& params, CycleOrder order) {
  const DenominatorPoly dpoly = build_denominator(params);
  const RootClassification cls = classify_roots(dpoly, params);
  return solve_boundary(params, order, cls);
}

bool closed_pi_available(const ModelParams& params, CycleOrder order) {
  if (order == CycleOrder::RedFirst) return params.ell <= 3;
  return params.ell == 1;
}

// One verification line: an asserted check passes iff value <= tol; a
// reported-only check never fails the run.
struct Check {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool asserted = true;
  std::string provenance = kSolver;
  std::string note;

  bool passed() const { return note.empty() && (!asserted || value <= tol); }
};

const std::vector<double> kWideGrid = {0.05, 0.1,  0.15, 0.2, 0.25,
                                       0.3,  0.35, 0.4,  0.45};
const std::vector<double> kCoreGrid = {0.1, 0.2, 0.3, 0.4};

std::vector<int> displayed_nu_indices(int ell) {
  if (ell == 1) return {0, -1};
  if (ell == 2) return {0, -1, -2, 1};
  return {0, -1, -2, -3, 1, 2};
}

double closed_vs_solver_gap(const ModelParams& params) {
  const DenominatorPoly dpoly = build_denominator(params);
  const RootClassification cls = classify_roots(dpoly, params);
  const StationarySolution red =
      solve_boundary(params, CycleOrder::RedFirst, cls);
  const HitProbabilities hit = solve_hit_probs(params);
  const ClumpSolution clump =
      solve_clump_system(params, hit, red.tail_amplitude);

  double gap = 0.0;
  const auto take = [&gap](double got, double want) {
    gap = std::max(gap, rel_gap(got, want));
  };
  for (int j = 0; j < params.ell; ++j) {
    take(red.boundary[j], pi_closed(params, CycleOrder::RedFirst, j));
  }
  take(red.tail_amplitude, amplitude_closed(params, CycleOrder::RedFirst));
  for (int j : displayed_nu_indices(params.ell)) {
    take(hit.at(j), nu_closed(params, j));
  }
  take(clump.lambda_over_pi, lambda_closed(params));
  take(clump.epsilon, epsilon1_closed(params));

  if (params.ell == 1) {
    const StationarySolution green =
        solve_boundary(params, CycleOrder::GreenFirst, cls);
    for (int j = 0; j <= 6; ++j) {
      take(red.pi_vector[j], pi_closed(params, CycleOrder::RedFirst, j));
      take(green.pi_vector[j], pi_closed(params, CycleOrder::GreenFirst, j));
    }
    take(green.tail_amplitude,
         amplitude_closed(params, CycleOrder::GreenFirst));
    const EpsilonPair pair = epsilon_pair(params);
    take(pair.eps1, epsilon1_closed(params));
    take(pair.eps0 / pair.eps1, params.p / params.q);
  }
  return gap;
}

struct OracleGaps {
  double pi_dev = 0.0;
  double tail_ratio = 0.0;
  double amplitude = 0.0;
};

OracleGaps oracle_equivalence_gaps(const ModelParams& params, CycleOrder order,
                                   int truncation) {
  const KernelMatrix kernel = cycle_kernel(params, order, truncation);
  const std::vector<double> direct = stationary_oracle(kernel);
  const StationarySolution sol = solve_order(params, order);

  OracleGaps gaps;
  const int window = std::min<int>(kPiWindow, truncation / 2);
  for (int j = 0; j < window; ++j) {
    gaps.pi_dev = std::max(gaps.pi_dev, std::fabs(direct[j] - sol.pi_vector[j]));
  }
  const double r = sol.decay;
  gaps.tail_ratio = std::fabs(direct[51] / direct[50] - r);
  gaps.amplitude =
      rel_gap(direct[50] / std::pow(r, 50), sol.tail_amplitude);
  return gaps;
}

int empirical_median(const MaxEmpirical& emp) {
  long long seen = 0;
  for (const auto& [value, count] : emp.counts) {
    seen += count;
    if (2 * seen >= emp.replicates) return value;
  }
  return emp.counts.empty() ? 0 : emp.counts.rbegin()->first;
}

void append_conjecture_entries(Report& rep, std::vector<Check>& checks,
                               int ell_max) {
  struct Slot {
    int ell;
    double p;
    double gap = 0.0;
    std::string note;
  };
  std::vector<Slot> slots;
  for (int ell = 4; ell <= ell_max; ++ell) {
    for (double p : kCoreGrid) slots.push_back({ell, p, 0.0, {}});
  }
  parallel_for(static_cast<int>(slots.size()), [&](int i) {
    try {
      slots[i].gap = conjecture_ratio(make_params(slots[i].p, slots[i].ell)).rel_gap;
    } catch (const std::exception& e) {
      slots[i].note = e.what();
    }
  });
  for (const Slot& slot : slots) {
    Check check;
    check.name = "conjecture_gap/l" + std::to_string(slot.ell) + "/p" + pkey(slot.p);
    check.value = slot.gap;
    check.asserted = false;
    check.note = slot.note;
    checks.push_back(check);
    rep.warn(check.name + " is extrapolation evidence, not an assertion: the"
             " prefactor identity is unproven past ell = 3");
  }
}

}  // namespace

Report cmd_stationary(double p, int ell, CycleOrder order, int truncation) {
  if (truncation < 50 || truncation > 4000) {
    throw std::invalid_argument("truncation must lie in [50, 4000]");
  }
  const ModelParams params = make_params(p, ell);
  Report rep;
  rep.command = "stationary";
  stamp(rep, params);
  rep.meta_str("order", order_name(order));
  rep.meta_int("truncation", truncation);

  const StationarySolution sol = solve_order(params, order);
  for (int j = 0; j <= 2 * ell; ++j) {
    rep.add("pi" + std::to_string(j), sol.pi_vector[j], kSolver);
  }
  rep.add("tail_amplitude", sol.tail_amplitude, kSolver);
  rep.add("decay", sol.decay, kClosed);
  rep.add("tail_mass", sol.tail_mass, kSolver);

  if (closed_pi_available(params, order)) {
    for (int j = 0; j < ell; ++j) {
      rep.add("pi" + std::to_string(j) + "_closed",
              pi_closed(params, order, j), kClosed);
    }
    if (order == CycleOrder::RedFirst || ell == 1) {
      rep.add("tail_amplitude_closed", amplitude_closed(params, order),
              kClosed);
    }
  }

  const KernelMatrix kernel = cycle_kernel(params, order, truncation);
  const std::vector<double> direct = stationary_oracle(kernel);
  double max_dev = 0.0;
  const int window = std::min<int>(kPiWindow, truncation / 2);
  for (int j = 0; j < window; ++j) {
    max_dev = std::max(max_dev, std::fabs(direct[j] - sol.pi_vector[j]));
  }
  rep.add("oracle_max_dev", max_dev, kOracle);
  return rep;
}

Report cmd_clump(double p, int ell) {
  const ModelParams params = make_params(p, ell);
  Report rep;
  rep.command = "clump";
  stamp(rep, params);

  const StationarySolution red = solve_order(params, CycleOrder::RedFirst);
  const HitProbabilities hit = solve_hit_probs(params);
  const ClumpSolution clump =
      solve_clump_system(params, hit, red.tail_amplitude);

  rep.add("nu0", hit.nu0, kSolver);
  for (int k = 1; k <= ell; ++k) {
    rep.add("nu_m" + std::to_string(k), hit.nu_neg[k - 1], kSolver);
    rep.add("nu_p" + std::to_string(k), hit.nu_pos[k - 1], kSolver);
  }
  for (int i = 0; i < ell; ++i) {
    rep.add("lambda" + std::to_string(i), clump.lambdas[i], kSolver);
  }
  rep.add("lambda_over_pi", clump.lambda_over_pi, kSolver);
  rep.add("expected_sojourn", clump.expected_sojourn, kSolver);
  rep.add("tail_amplitude", red.tail_amplitude, kSolver);

  if (ell <= 3) {
    const EpsilonPair pair = epsilon_pair(params);
    rep.add("epsilon0", pair.eps0, kSolver);
    rep.add("epsilon1", pair.eps1, kSolver);
    rep.add("epsilon1_closed", epsilon1_closed(params), kClosed);
    if (ell >= 2) {
      const ChiCoefficients coeffs = chi_coefficients(params);
      rep.add(ell == 2 ? "chi2" : "chi3", chi(params), kClosed);
      rep.add("chi_alpha", coeffs.alpha, kClosed);
    }
  } else {
    rep.add("epsilon1", clump.epsilon, kSolver);
    rep.add("epsilon0",
            clump.epsilon * std::pow(params.p / params.q, ell), kSolver);
    rep.warn("epsilon prefactor extrapolated beyond the validated block"
             " lengths (ell <= 3)");
  }

  if (ell >= 2) {
    const ConjectureCheck check = conjecture_ratio(params);
    rep.add("hidden_relation_lhs", check.lhs, kSolver);
    rep.add("hidden_relation_rhs", check.rhs, kSolver);
    rep.add("hidden_relation_gap", check.rel_gap, kSolver);
    if (check.extrapolated) {
      rep.warn("ratio identity lambda/pi = ell q^2 A is conjectural for"
               " ell >= 4; gap reported as evidence only");
    }
  }
  return rep;
}

Report cmd_predict(double p, int ell, long long n) {
  const ModelParams params = make_params(p, ell);
  Report rep;
  rep.command = "predict";
  stamp(rep, params);
  rep.meta_int("n", n);

  const MaxPrediction pred = predict_max_cdf(params, n);
  const char* source = (ell == 1) ? kClosed : kSolver;
  rep.meta_int("m_lo", pred.m_lo);
  rep.meta_int("m_hi", pred.m_hi);
  rep.meta_int("mode_lo", pred.mode_lo);
  rep.meta_int("mode_hi", pred.mode_hi);
  rep.add("epsilon", pred.epsilon, source);
  rep.add("decay", pred.decay, kClosed);
  for (int m = pred.m_lo; m <= pred.m_hi; ++m) {
    rep.add("cdf_" + std::to_string(m), pred.cdf[m - pred.m_lo], source);
  }
  if (pred.extrapolated) {
    rep.warn("epsilon prefactor extrapolated beyond the validated block"
             " lengths (ell <= 3)");
  }
  return rep;
}

Report cmd_simulate(double p, int ell, long long n, int replicates,
                    std::uint64_t seed, bool record_clumps) {
  const ModelParams params = make_params(p, ell);
  Report rep;
  rep.command = "simulate";
  stamp(rep, params);
  rep.meta_int("n", n);
  rep.meta_int("replicates", replicates);
  rep.meta_int("seed", static_cast<long long>(seed));

  SimConfig config;
  config.params = params;
  config.n = n;
  config.replicates = replicates;
  config.seed = seed;
  config.record_clumps = record_clumps;

  const MaxEmpirical emp = simulate_walk(config);
  const MaxPrediction pred = predict_max_cdf(params, n);
  const char* source = (ell == 1) ? kClosed : kSolver;

  int checked = 0;
  int failed = 0;
  for (int m = pred.m_lo; m <= pred.m_hi; ++m) {
    const double predicted = pred.cdf[m - pred.m_lo];
    const double empirical = emp.cdf(m);
    const double se = emp.std_error_at(m);
    const std::string tag = std::to_string(m);
    rep.add("pred_cdf_" + tag, predicted, source);
    rep.add("emp_cdf_" + tag, empirical, kMonteCarlo);
    rep.add("zscore_" + tag,
            se > 0.0 ? (empirical - predicted) / se : 0.0, kMonteCarlo);
    if (predicted >= 0.05 && predicted <= 0.95) {
      ++checked;
      if (std::fabs(empirical - predicted) > 3.0 * se + 0.015) {
        ++failed;
        rep.warn("empirical cdf at m = " + tag +
                 " sits outside 3 stderr + 0.015 of the prediction");
      }
    }
  }
  rep.add("points_checked", checked, kMonteCarlo);
  rep.add("points_failed", failed, kMonteCarlo);
  rep.ok = (failed == 0);

  if (record_clumps) {
    const SojournEmpirical soj = estimate_sojourn(config);
    rep.add("emp_sojourn_mean", soj.mean, kMonteCarlo);
    rep.add("emp_sojourn_std_error", soj.std_error, kMonteCarlo);
    rep.add("sojourn_level", soj.level, kMonteCarlo);
    rep.add("sojourn_clumps", static_cast<double>(soj.clumps), kMonteCarlo);
    const HitProbabilities hit = solve_hit_probs(params);
    rep.add("expected_sojourn", 1.0 / (1.0 - hit.nu0), kSolver);
  }
  if (pred.extrapolated) {
    rep.warn("epsilon prefactor extrapolated beyond the validated block"
             " lengths (ell <= 3)");
  }
  return rep;
}

Report cmd_verify(int ell_max, bool quick, std::uint64_t seed) {
  if (ell_max < 3 || ell_max > 6) {
    throw std::invalid_argument("ell-max must lie in [3, 6]");
  }
  Report rep;
  rep.command = "verify";
  rep.meta_str("version", kVersion);
  rep.meta_int("ell_max", ell_max);
  rep.meta_str("mode", quick ? "quick" : "full");
  rep.meta_int("seed", static_cast<long long>(seed));
  rep.meta_str("p_grid", "0.05..0.45 step 0.05");

  std::vector<Check> checks;

  // Closed forms against the generic pipeline.
  for (int ell = 1; ell <= 3; ++ell) {
    Check check;
    check.name = "closed_vs_solver/l" + std::to_string(ell);
    check.tol = 1e-9;
    check.provenance = kClosed;
    try {
      for (double p : kWideGrid) {
        check.value =
            std::max(check.value, closed_vs_solver_gap(make_params(p, ell)));
      }
    } catch (const std::exception& e) {
      check.note = e.what();
    }
    checks.push_back(check);
  }

  // Truncated direct solve against the generating-function solve.
  {
    struct Slot {
      int ell;
      double p;
      CycleOrder order;
      OracleGaps gaps;
      std::string note;
    };
    std::vector<Slot> slots;
    for (int ell = 1; ell <= 3; ++ell) {
      for (double p : kWideGrid) {
        slots.push_back({ell, p, CycleOrder::RedFirst, {}, {}});
        slots.push_back({ell, p, CycleOrder::GreenFirst, {}, {}});
      }
    }
    parallel_for(static_cast<int>(slots.size()), [&](int i) {
      try {
        slots[i].gaps = oracle_equivalence_gaps(
            make_params(slots[i].p, slots[i].ell), slots[i].order, 400);
      } catch (const std::exception& e) {
        slots[i].note = e.what();
      }
    });
    for (int ell = 1; ell <= 3; ++ell) {
      Check pi_dev, ratio, amp;
      pi_dev.name = "oracle_pi_dev/l" + std::to_string(ell);
      pi_dev.tol = 1e-9;
      pi_dev.provenance = kOracle;
      ratio.name = "oracle_tail_ratio/l" + std::to_string(ell);
      ratio.tol = 1e-8;
      ratio.provenance = kOracle;
      amp.name = "oracle_amplitude/l" + std::to_string(ell);
      amp.tol = 1e-6;
      amp.provenance = kOracle;
      for (const Slot& slot : slots) {
        if (slot.ell != ell) continue;
        if (!slot.note.empty()) {
          pi_dev.note = slot.note;
          continue;
        }
        pi_dev.value = std::max(pi_dev.value, slot.gaps.pi_dev);
        // The ratio and amplitude comparisons are asymptotic statements and
        // keep their p >= 0.1 grid: below that the subdominant root sits
        // within 25% of z* in modulus, so depth 50 still carries ~1e-4 of
        // that mode and the comparison would measure mode mixing rather
        // than solver error. The max-deviation check has no such limit.
        if (slot.p >= 0.0999) {
          ratio.value = std::max(ratio.value, slot.gaps.tail_ratio);
          amp.value = std::max(amp.value, slot.gaps.amplitude);
        }
      }
      checks.push_back(pi_dev);
      checks.push_back(ratio);
      checks.push_back(amp);
    }
  }

  // Hitting probabilities against the dense lattice solve, plus the
  // time-reversal identity nu_k = nu_{-k} (p^2/q^2)^k taken from the
  // lattice side alone.
  {
    const int top = std::min(ell_max, 5);
    struct Slot {
      int ell;
      double p;
      double dev = 0.0;
      double reversal = 0.0;
      std::string note;
    };
    std::vector<Slot> slots;
    for (int ell = 1; ell <= top; ++ell) {
      for (double p : kCoreGrid) slots.push_back({ell, p, 0.0, 0.0, {}});
    }
    parallel_for(static_cast<int>(slots.size()), [&](int i) {
      try {
        const ModelParams params = make_params(slots[i].p, slots[i].ell);
        const HitProbabilities direct = hit_probs_oracle(params, 200);
        const HitProbabilities solved = solve_hit_probs(params);
        double dev = std::fabs(direct.nu0 - solved.nu0);
        for (int k = 1; k <= params.ell; ++k) {
          dev = std::max(dev, std::fabs(direct.nu_neg[k - 1] -
                                        solved.nu_neg[k - 1]));
          dev = std::max(dev, std::fabs(direct.nu_pos[k - 1] -
                                        solved.nu_pos[k - 1]));
        }
        slots[i].dev = dev;
        const double r =
            (params.p * params.p) / (params.q * params.q);
        double rev = 0.0;
        for (int k = 1; k <= params.ell; ++k) {
          rev = std::max(rev, std::fabs(direct.nu_pos[k - 1] -
                                        direct.nu_neg[k - 1] * std::pow(r, k)));
        }
        slots[i].reversal = rev;
      } catch (const std::exception& e) {
        slots[i].note = e.what();
      }
    });
    for (int ell = 1; ell <= top; ++ell) {
      Check dev, rev;
      dev.name = "hit_probs_oracle/l" + std::to_string(ell);
      dev.tol = 1e-6;
      dev.provenance = kOracle;
      rev.name = "reversal_identity/l" + std::to_string(ell);
      rev.tol = 1e-9;
      rev.provenance = kOracle;
      for (const Slot& slot : slots) {
        if (slot.ell != ell) continue;
        if (!slot.note.empty()) {
          dev.note = slot.note;
          continue;
        }
        dev.value = std::max(dev.value, slot.dev);
        rev.value = std::max(rev.value, slot.reversal);
      }
      checks.push_back(dev);
      checks.push_back(rev);
    }
  }

  // Perfect-square structure of the exponential coefficients.
  {
    Check chi2_check, chi3_check;
    chi2_check.name = "perfect_square_chi2";
    chi2_check.tol = 1e-12;
    chi2_check.provenance = kClosed;
    chi3_check.name = "perfect_square_chi3";
    chi3_check.tol = 1e-10;
    chi3_check.provenance = kClosed;
    try {
      for (double p : kWideGrid) {
        {
          const ModelParams params = make_params(p, 2);
          const double d = params.q - params.p;
          const double theta = theta_family(params).theta1;
          const double square = d * d * (1.0 + d * theta) * (1.0 + d * theta) /
                                (32.0 * std::pow(params.q, 6));
          chi2_check.value = std::max(chi2_check.value,
                                      rel_gap(chi(params) / 4.0, square));
        }
        {
          const ModelParams params = make_params(p, 3);
          const double d = params.q - params.p;
          const double theta = theta_family(params).theta2;
          const ChiCoefficients coeffs = chi_coefficients(params);
          const double core = d * coeffs.u + d * d * d * theta +
                              std::sqrt(2.0) * d * d *
                                  std::sqrt(coeffs.v + coeffs.u * theta);
          const double square =
              core * core / (288.0 * params.p * std::pow(params.q, 9));
          chi3_check.value = std::max(chi3_check.value,
                                      rel_gap(chi(params) / 6.0, square));
        }
      }
    } catch (const std::exception& e) {
      chi2_check.note = e.what();
      chi3_check.note = e.what();
    }
    checks.push_back(chi2_check);
    checks.push_back(chi3_check);
  }

  // Exact single-block chain: every quantity collapses to a short formula.
  {
    Check check;
    check.name = "exact_chain_l1";
    check.tol = 1e-12;
    check.provenance = kClosed;
    try {
      for (double p : kWideGrid) {
        const ModelParams params = make_params(p, 1);
        const double d = params.q - params.p;
        const HitProbabilities hit = solve_hit_probs(params);
        const StationarySolution red =
            solve_order(params, CycleOrder::RedFirst);
        const ClumpSolution clump =
            solve_clump_system(params, hit, red.tail_amplitude);
        const EpsilonPair pair = epsilon_pair(params);
        const double eps1 =
            params.p * d * d / (2.0 * std::pow(params.q, 3));
        check.value = std::max(check.value, rel_gap(hit.nu0, 2.0 * params.p));
        check.value =
            std::max(check.value, rel_gap(clump.expected_sojourn, 1.0 / d));
        check.value = std::max(check.value, rel_gap(clump.epsilon, eps1));
        check.value = std::max(check.value, rel_gap(pair.eps1, eps1));
        check.value = std::max(
            check.value, rel_gap(pair.eps0 / pair.eps1, params.p / params.q));
      }
    } catch (const std::exception& e) {
      check.note = e.what();
    }
    checks.push_back(check);
  }

  // Slot-resolution warm-up chain identity.
  {
    Check check;
    check.name = "slot_walk_identity";
    check.tol = 1e-12;
    check.provenance = kClosed;
    for (double p : kWideGrid) {
      const ModelParams params = make_params(p, 1);
      const double ec = 1.0 / (params.q - params.p);
      for (int k = 1; k <= 10; ++k) {
        const double lhs = slot_walk_pi(params, k) / ec;
        const double rhs =
            slot_walk_epsilon(params) * std::pow(params.p / params.q, k - 1);
        check.value = std::max(check.value, rel_gap(lhs, rhs));
      }
    }
    checks.push_back(check);
  }

  // Ratio identity, exact range.
  for (int ell = 2; ell <= 3; ++ell) {
    Check check;
    check.name = "hidden_relation/l" + std::to_string(ell);
    check.tol = 1e-8;
    try {
      for (double p : kWideGrid) {
        check.value = std::max(check.value,
                               conjecture_ratio(make_params(p, ell)).rel_gap);
      }
    } catch (const std::exception& e) {
      check.note = e.what();
    }
    checks.push_back(check);
  }

  if (ell_max >= 4) append_conjecture_entries(rep, checks, ell_max);

  // Kernel row sums away from the truncation edge.
  {
    Check check;
    check.name = "row_stochastic";
    check.tol = 1e-12;
    for (int ell = 1; ell <= 3; ++ell) {
      for (double p : {0.05, 0.3, 0.45}) {
        const ModelParams params = make_params(p, ell);
        const int m = 40;
        const auto [up, down] = single_step_kernels(params, m);
        for (int i = 0; i + 1 < m; ++i) {
          check.value = std::max(check.value, std::fabs(up.row_sum(i) - 1.0));
        }
        for (int i = 0; i < m; ++i) {
          check.value = std::max(check.value, std::fabs(down.row_sum(i) - 1.0));
        }
        for (CycleOrder order :
             {CycleOrder::RedFirst, CycleOrder::GreenFirst}) {
          const KernelMatrix kernel = cycle_kernel(params, order, m);
          for (int i = 0; i < m - ell; ++i) {
            check.value =
                std::max(check.value, std::fabs(kernel.row_sum(i) - 1.0));
          }
        }
      }
    }
    checks.push_back(check);
  }

  // The two sampling instants differ by a factor q/p per level at ell = 1.
  {
    Check check;
    check.name = "order_ratio/l1";
    check.tol = 1e-10;
    try {
      for (double p : kWideGrid) {
        const ModelParams params = make_params(p, 1);
        const StationarySolution red = solve_order(params, CycleOrder::RedFirst);
        const StationarySolution green =
            solve_order(params, CycleOrder::GreenFirst);
        const double want = params.q / params.p;
        for (int j = 1; j <= 20; ++j) {
          check.value = std::max(
              check.value,
              rel_gap(green.pi_vector[j] / red.pi_vector[j], want));
        }
      }
    } catch (const std::exception& e) {
      check.note = e.what();
    }
    checks.push_back(check);
  }

  if (!quick) {
    // Same counts twice, and byte-identical reports, under a fixed seed.
    {
      Check check;
      check.name = "determinism_under_seed";
      check.tol = 0.5;
      check.provenance = kMonteCarlo;
      SimConfig config;
      config.params = make_params(0.3, 1);
      config.n = 2000;
      config.replicates = 200;
      config.seed = seed;
      const MaxEmpirical a = simulate_walk(config);
      const MaxEmpirical b = simulate_walk(config);
      if (a.counts != b.counts) check.value = 1.0;
      if (to_json(cmd_predict(0.3, 2, 100000)) !=
          to_json(cmd_predict(0.3, 2, 100000))) {
        check.value = 1.0;
      }
      checks.push_back(check);
    }

    // Reflection and block monotonicity along one trajectory, and the
    // arrival-free degenerate walk.
    {
      Check check;
      check.name = "reflection_invariants";
      check.tol = 0.5;
      check.provenance = kMonteCarlo;
      const ModelParams params = make_params(0.3, 2);
      const std::vector<int> path = sample_path(params, 20000, seed);
      int violations = 0;
      for (long long t = 0; t < 20000; ++t) {
        const int before = path[static_cast<size_t>(t)];
        const int after = path[static_cast<size_t>(t) + 1];
        if (after < 0) ++violations;
        const bool red = (t % 4) < 2;
        if (red && after < before) ++violations;
        if (!red && after > before) ++violations;
      }
      SimConfig off;
      off.params = ModelParams{0.0, 1.0, 1};
      off.n = 1000;
      off.replicates = 5;
      off.seed = seed;
      const MaxEmpirical frozen = simulate_walk(off);
      if (frozen.counts.size() != 1 || frozen.counts.count(0) == 0) {
        ++violations;
      }
      check.value = violations;
      checks.push_back(check);
    }

    // The maximum grows stochastically with the horizon and with p.
    {
      Check check;
      check.name = "stochastic_ordering";
      check.tol = 0.5;
      check.provenance = kMonteCarlo;
      SimConfig config;
      config.params = make_params(0.3, 1);
      config.replicates = 500;
      config.seed = seed + 1;
      config.n = 2000;
      const int med_short = empirical_median(simulate_walk(config));
      config.n = 20000;
      const int med_long = empirical_median(simulate_walk(config));
      config.params = make_params(0.2, 1);
      const int med_low_p = empirical_median(simulate_walk(config));
      int violations = 0;
      if (med_short > med_long) ++violations;
      if (med_low_p > med_long) ++violations;
      check.value = violations;
      checks.push_back(check);
    }

    // Empirical law of the maximum against the exponential prediction.
    for (int ell = 1; ell <= 2; ++ell) {
      Check check;
      check.name = "mc_max_cdf/l" + std::to_string(ell);
      check.tol = 0.015;
      check.provenance = kMonteCarlo;
      try {
        const ModelParams params = make_params(0.3, ell);
        SimConfig config;
        config.params = params;
        config.n = 100000;
        config.replicates = 2000;
        config.seed = seed + 2 + ell;
        const MaxEmpirical emp = simulate_walk(config);
        const MaxPrediction pred = predict_max_cdf(params, config.n);
        double worst = 0.0;
        for (int m = pred.m_lo; m <= pred.m_hi; ++m) {
          const double predicted = pred.cdf[m - pred.m_lo];
          if (predicted < 0.05 || predicted > 0.95) continue;
          const double excess = std::fabs(emp.cdf(m) - predicted) -
                                3.0 * emp.std_error_at(m);
          worst = std::max(worst, excess);
        }
        check.value = worst;
      } catch (const std::exception& e) {
        check.note = e.what();
      }
      checks.push_back(check);
    }

    // Empirical occupancy of the sampled chain.
    {
      Check check;
      check.name = "mc_stationary_pi0/l2";
      check.provenance = kMonteCarlo;
      try {
        const ModelParams params = make_params(0.3, 2);
        SimConfig config;
        config.params = params;
        config.n = 1000000;
        config.seed = seed + 5;
        const StationaryEmpirical est =
            estimate_stationary(config, CycleOrder::RedFirst, 10000);
        check.value = std::fabs(est.occupancy[0] -
                                pi_closed(params, CycleOrder::RedFirst, 0));
        check.tol = 3.0 * est.pi0_std_error;
      } catch (const std::exception& e) {
        check.note = e.what();
      }
      checks.push_back(check);
    }
    {
      Check check;
      check.name = "mc_stationary_pi0/l1";
      check.provenance = kMonteCarlo;
      try {
        const ModelParams params = make_params(1.0 / 3.0, 1);
        SimConfig config;
        config.params = params;
        config.n = 1000000;
        config.seed = seed + 6;
        const StationaryEmpirical red =
            estimate_stationary(config, CycleOrder::RedFirst, 10000);
        const StationaryEmpirical green =
            estimate_stationary(config, CycleOrder::GreenFirst, 10000);
        const double dev_red = std::fabs(red.occupancy[0] - 0.75);
        const double dev_green = std::fabs(green.occupancy[0] - 0.5);
        check.value = std::max(dev_red - 3.0 * red.pi0_std_error,
                               dev_green - 3.0 * green.pi0_std_error);
        check.tol = 0.0;
      } catch (const std::exception& e) {
        check.note = e.what();
      }
      checks.push_back(check);
    }
    {
      Check check;
      check.name = "mc_tail_ratio/l3";
      check.tol = 0.05;
      check.provenance = kMonteCarlo;
      try {
        const ModelParams params = make_params(0.45, 3);
        SimConfig config;
        config.params = params;
        config.n = 1000002;
        config.seed = seed + 7;
        const StationaryEmpirical est =
            estimate_stationary(config, CycleOrder::RedFirst, 10002);
        const double r = (params.p * params.p) / (params.q * params.q);
        double acc = 0.0;
        int used = 0;
        for (int j = 4; j <= 9; ++j) {
          if (j + 1 < static_cast<int>(est.occupancy.size()) &&
              est.occupancy[j] > 0.0) {
            acc += est.occupancy[j + 1] / est.occupancy[j];
            ++used;
          }
        }
        check.value = used > 0 ? std::fabs(acc / used - r) : 1.0;
      } catch (const std::exception& e) {
        check.note = e.what();
      }
      checks.push_back(check);
    }

    // Mean sojourn per clump at the highest well-visited level.
    for (double p : {0.3, 0.1}) {
      Check check;
      check.name = "mc_sojourn/l1/p" + pkey(p);
      check.provenance = kMonteCarlo;
      try {
        const ModelParams params = make_params(p, 1);
        SimConfig config;
        config.params = params;
        config.n = 2000000;
        config.seed = seed + 8;
        const SojournEmpirical soj = estimate_sojourn(config);
        const double want = 1.0 / (params.q - params.p);
        check.value = std::fabs(soj.mean - want);
        check.tol = 3.0 * soj.std_error + 0.15;
      } catch (const std::exception& e) {
        check.note = e.what();
      }
      checks.push_back(check);
    }

    // Spot check of one hitting probability by direct simulation.
    {
      Check check;
      check.name = "mc_hit_prob/l2";
      check.provenance = kMonteCarlo;
      try {
        const ModelParams params = make_params(0.3, 2);
        const SojournEstimate est =
            sojourn_oracle(params, -1, 200000, 4000, seed + 9);
        check.value = std::fabs(est.value - solve_hit_probs(params).nu_neg[0]);
        check.tol = 3.0 * est.std_error + 0.002;
      } catch (const std::exception& e) {
        check.note = e.what();
      }
      checks.push_back(check);
    }

    // Multiplying the horizon by q^2/p^2 shifts the empirical law of the
    // maximum by one level.
    {
      Check check;
      check.name = "log_periodicity_shift";
      check.tol = 0.02;
      check.provenance = kMonteCarlo;
      try {
        const ModelParams params = make_params(0.3, 1);
        SimConfig config;
        config.params = params;
        config.replicates = 2000;
        config.seed = seed + 10;
        config.n = 18000;
        const MaxEmpirical base = simulate_walk(config);
        config.n = 98000;
        const MaxEmpirical scaled = simulate_walk(config);
        const MaxPrediction pred = predict_max_cdf(params, 18000);
        double worst = 0.0;
        for (int m = pred.m_lo; m <= pred.m_hi; ++m) {
          const double predicted = pred.cdf[m - pred.m_lo];
          if (predicted < 0.05 || predicted > 0.95) continue;
          const double excess =
              std::fabs(base.cdf(m) - scaled.cdf(m + 1)) -
              3.0 * (base.std_error_at(m) + scaled.std_error_at(m + 1));
          worst = std::max(worst, excess);
        }
        check.value = worst;
      } catch (const std::exception& e) {
        check.note = e.what();
      }
      checks.push_back(check);
    }
  }

  int failures = 0;
  for (const Check& check : checks) {
    rep.add(check.name, check.value, check.provenance);
    if (!check.passed()) {
      ++failures;
      std::string detail = "FAIL " + check.name + ": value " +
                           format_double(check.value) + " exceeds tolerance " +
                           format_double(check.tol);
      if (!check.note.empty()) detail = "FAIL " + check.name + ": " + check.note;
      rep.warn(detail);
    }
  }
  rep.add("checks_total", static_cast<double>(checks.size()),
          kSolver);
  rep.add("checks_failed", static_cast<double>(failures), kSolver);
  rep.ok = (failures == 0);
  return rep;
}

}  // namespace clumpq
