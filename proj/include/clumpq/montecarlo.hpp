#ifndef CLUMPQ_MONTECARLO_HPP
#define CLUMPQ_MONTECARLO_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "clumpq/model.hpp"

namespace clumpq {

// One simulation request: a horizon of n slots (whole cycles only), a number
// of independent replicates, and the master seed that keys every replicate
// stream.
struct SimConfig {
  ModelParams params;
  long long n = 0;
  int replicates = 1;
  std::uint64_t seed = 0;
  bool record_clumps = false;
};

// Distribution of the running maximum M_n across replicates.
struct MaxEmpirical {
  int replicates = 0;
  std::map<int, int> counts;

  double cdf(int m) const;
  double std_error_at(int m) const;
};

MaxEmpirical simulate_walk(const SimConfig& config);

// Single trajectory of the reflected walk, states S_0..S_n, replicate
// stream 0 of the given seed.
std::vector<int> sample_path(const ModelParams& params, long long n,
                             std::uint64_t seed);

// Occupancy frequencies of the walk observed once per cycle.
struct StationaryEmpirical {
  long long samples = 0;
  std::vector<double> occupancy;
  double pi0_std_error = 0.0;
};

StationaryEmpirical estimate_stationary(const SimConfig& config,
                                        CycleOrder order,
                                        long long burn_in = 10000);

// Mean number of visits to the reference level per clump, with the window
// rule that delimited the clumps.
struct SojournEmpirical {
  int level = 0;
  long long clumps = 0;
  double mean = 0.0;
  double std_error = 0.0;
  int drop_window = 0;
  long long gap_window = 0;
};

SojournEmpirical estimate_sojourn(const SimConfig& config, int min_visits = 400,
                                  int drop_multiple = 4, int gap_multiple = 64);

// Worker count for replicate-parallel runs: CLUMPQ_THREADS when set and
// positive, hardware concurrency when unset or 0.
int thread_cap();

}  // namespace clumpq

#endif  // CLUMPQ_MONTECARLO_HPP
