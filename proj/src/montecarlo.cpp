#include "clumpq/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "clumpq/errors.hpp"
#include "clumpq/rng.hpp"

namespace clumpq {

namespace {

void check_config(const SimConfig& config) {
  const int ell = config.params.ell;
  if (ell < 1) throw std::invalid_argument("ell must be at least 1");
  if (config.n < 2 * ell || config.n % (2 * ell) != 0) {
    throw std::invalid_argument("horizon must be a positive multiple of 2*ell");
  }
  if (config.replicates < 1) {
    throw std::invalid_argument("need at least one replicate");
  }
}

// One replicate of the reflected walk; returns the running maximum. The
// per-slot uniform is always drawn so the stream position depends only on
// the slot index.
int run_replicate(const ModelParams& params, long long n, CounterRng& rng) {
  const int ell = params.ell;
  const double p = params.p;
  const double q = params.q;
  int s = 0;
  int peak = 0;
  long long t = 0;
  while (t < n) {
    for (int i = 0; i < ell; ++i, ++t) {
      if (rng.uniform() < p) ++s;
    }
    if (s > peak) peak = s;
    for (int i = 0; i < ell; ++i, ++t) {
      if (rng.uniform() < q && s > 0) --s;
    }
  }
  return peak;
}

}  // namespace

double MaxEmpirical::cdf(int m) const {
  long long below = 0;
  for (const auto& [value, count] : counts) {
    if (value <= m) below += count;
  }
  return static_cast<double>(below) / static_cast<double>(replicates);
}

double MaxEmpirical::std_error_at(int m) const {
  const double c = cdf(m);
  return std::sqrt(c * (1.0 - c) / static_cast<double>(replicates));
}

MaxEmpirical simulate_walk(const SimConfig& config) {
  check_config(config);

  const int workers =
      std::max(1, std::min(thread_cap(), config.replicates));
  std::vector<std::map<int, int>> partial(workers);

  auto run_chunk = [&](int w) {
    const int lo = static_cast<int>(
        static_cast<long long>(config.replicates) * w / workers);
    const int hi = static_cast<int>(
        static_cast<long long>(config.replicates) * (w + 1) / workers);
    for (int r = lo; r < hi; ++r) {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(r));
      ++partial[w][run_replicate(config.params, config.n, rng)];
    }
  };

  if (workers == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_chunk, w);
    for (std::thread& th : pool) th.join();
  }

  MaxEmpirical out;
  out.replicates = config.replicates;
  for (const auto& chunk : partial) {
    for (const auto& [value, count] : chunk) out.counts[value] += count;
  }
  return out;
}

std::vector<int> sample_path(const ModelParams& params, long long n,
                             std::uint64_t seed) {
  const int ell = params.ell;
  if (n < 0 || n % (2 * ell) != 0) {
    throw std::invalid_argument("path length must be a multiple of 2*ell");
  }
  CounterRng rng(seed, 0);
  std::vector<int> path(static_cast<size_t>(n) + 1);
  path[0] = 0;
  int s = 0;
  long long t = 0;
  while (t < n) {
    for (int i = 0; i < ell; ++i, ++t) {
      if (rng.uniform() < params.p) ++s;
      path[static_cast<size_t>(t) + 1] = s;
    }
    for (int i = 0; i < ell; ++i, ++t) {
      if (rng.uniform() < params.q && s > 0) --s;
      path[static_cast<size_t>(t) + 1] = s;
    }
  }
  return path;
}

StationaryEmpirical estimate_stationary(const SimConfig& config,
                                        CycleOrder order, long long burn_in) {
  check_config(config);
  if (config.n < 1000000) {
    throw std::invalid_argument(
        "stationary estimation wants a single run of at least 1e6 slots");
  }
  if (burn_in < 0 || burn_in >= config.n) {
    throw std::invalid_argument("burn-in must lie inside the horizon");
  }

  const int ell = config.params.ell;
  const int cycle = 2 * ell;
  const int phase = (order == CycleOrder::RedFirst) ? 0 : ell;
  const std::vector<int> path = sample_path(config.params, config.n, config.seed);

  std::vector<long long> hits;
  std::vector<char> at_zero;
  long long start = burn_in;
  if (start % cycle != 0) start += cycle - start % cycle;
  for (long long t = start + phase; t <= config.n; t += cycle) {
    const int s = path[static_cast<size_t>(t)];
    if (s >= static_cast<int>(hits.size())) hits.resize(s + 1, 0);
    ++hits[s];
    at_zero.push_back(s == 0 ? 1 : 0);
  }

  StationaryEmpirical out;
  out.samples = static_cast<long long>(at_zero.size());
  if (out.samples == 0) throw StructuralError("no sampling instants survived");
  out.occupancy.resize(hits.size());
  for (size_t j = 0; j < hits.size(); ++j) {
    out.occupancy[j] =
        static_cast<double>(hits[j]) / static_cast<double>(out.samples);
  }

  // Batch means over the zero-level indicator absorb the autocorrelation of
  // the single long run.
  const int batches = 100;
  const long long per = out.samples / batches;
  if (per >= 1) {
    std::vector<double> means;
    means.reserve(batches);
    for (int b = 0; b < batches; ++b) {
      long long acc = 0;
      for (long long i = b * per; i < (b + 1) * per; ++i) acc += at_zero[i];
      means.push_back(static_cast<double>(acc) / static_cast<double>(per));
    }
    double mu = 0.0;
    for (double v : means) mu += v;
    mu /= batches;
    double var = 0.0;
    for (double v : means) var += (v - mu) * (v - mu);
    var /= (batches - 1);
    out.pi0_std_error = std::sqrt(var / batches);
  }
  return out;
}

SojournEmpirical estimate_sojourn(const SimConfig& config, int min_visits,
                                  int drop_multiple, int gap_multiple) {
  check_config(config);
  if (min_visits < 2) throw std::invalid_argument("min_visits too small");
  if (drop_multiple < 1 || gap_multiple < 1) {
    throw std::invalid_argument("window multiples must be positive");
  }

  const int ell = config.params.ell;
  const int cycle = 2 * ell;
  const std::vector<int> path = sample_path(config.params, config.n, config.seed);

  // Cycle-sampled states at the green-first instants.
  std::vector<int> y;
  y.reserve(static_cast<size_t>(config.n / cycle));
  for (long long t = ell; t <= config.n; t += cycle) {
    y.push_back(path[static_cast<size_t>(t)]);
  }

  std::vector<long long> visits;
  for (int s : y) {
    if (s >= static_cast<int>(visits.size())) visits.resize(s + 1, 0);
    ++visits[s];
  }
  int level = -1;
  for (int s = static_cast<int>(visits.size()) - 1; s >= 1; --s) {
    if (visits[s] >= min_visits) {
      level = s;
      break;
    }
  }
  if (level < 1) {
    throw StructuralError(
        "insufficient data: no level above 0 was visited often enough");
  }

  SojournEmpirical out;
  out.level = level;
  out.drop_window = drop_multiple * ell;
  out.gap_window = static_cast<long long>(gap_multiple) * ell;

  // A clump collects visits to the level until the walk either drops far
  // below it or stays away too long; the final unterminated clump is
  // discarded so the horizon cannot bias it short.
  std::vector<long long> sojourns;
  bool open = false;
  long long in_clump = 0;
  size_t last_visit = 0;
  for (size_t c = 0; c < y.size(); ++c) {
    if (y[c] == level) {
      if (!open) {
        open = true;
        in_clump = 0;
      }
      ++in_clump;
      last_visit = c;
      continue;
    }
    if (open && (y[c] < level - out.drop_window ||
                 static_cast<long long>(c - last_visit) > out.gap_window)) {
      sojourns.push_back(in_clump);
      open = false;
    }
  }

  out.clumps = static_cast<long long>(sojourns.size());
  if (out.clumps < 2) {
    throw StructuralError("insufficient data: fewer than two complete clumps");
  }
  double mu = 0.0;
  for (long long v : sojourns) mu += static_cast<double>(v);
  mu /= static_cast<double>(out.clumps);
  double var = 0.0;
  for (long long v : sojourns) {
    const double d = static_cast<double>(v) - mu;
    var += d * d;
  }
  var /= static_cast<double>(out.clumps - 1);
  out.mean = mu;
  out.std_error = std::sqrt(var / static_cast<double>(out.clumps));
  return out;
}

int thread_cap() {
  const char* env = std::getenv("CLUMPQ_THREADS");
  if (env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 0 || parsed > 1024) {
      throw std::invalid_argument("CLUMPQ_THREADS must be an integer in [0, 1024]");
    }
    if (parsed > 0) return static_cast<int>(parsed);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace clumpq
