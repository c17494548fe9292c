#ifndef CLUMPQ_COMMANDS_HPP
#define CLUMPQ_COMMANDS_HPP

#include <cstdint>

#include "clumpq/model.hpp"
#include "clumpq/report.hpp"

namespace clumpq {

inline constexpr const char* kVersion = "1.0.0";

// Master seed used whenever the caller does not pass one, so repeated runs
// are byte-identical by default.
inline constexpr std::uint64_t kDefaultSeed = 1000003;

// Stationary law of the cycle-sampled queue: boundary probabilities, tail
// amplitude, and the deviation against the truncated direct solve.
Report cmd_stationary(double p, int ell, CycleOrder order, int truncation);

// Hitting probabilities, clump rates, E(C), both epsilons, and the ratio
// identity gap.
Report cmd_clump(double p, int ell);

// Predicted distribution of the maximum over n slots.
Report cmd_predict(double p, int ell, long long n);

// Simulated distribution of the maximum next to the prediction, with
// per-point z-scores.
Report cmd_simulate(double p, int ell, long long n, int replicates,
                    std::uint64_t seed, bool record_clumps);

// Full cross-validation suite. Asserted checks run at ell <= 3; ell_max up
// to 5 additionally reports the unproven ratio gaps. quick skips the Monte
// Carlo checks. report.ok is false iff an asserted check failed.
Report cmd_verify(int ell_max, bool quick, std::uint64_t seed);

}  // namespace clumpq

#endif  // CLUMPQ_COMMANDS_HPP
