#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "clumpq/closedform.hpp"
#include "clumpq/clump.hpp"
#include "clumpq/model.hpp"
#include "clumpq/montecarlo.hpp"
#include "clumpq/rng.hpp"

using namespace clumpq;

TEST_CASE("counter rng streams are reproducible and decorrelated") {
  CounterRng a(42, 7);
  CounterRng b(42, 7);
  CounterRng c(42, 8);
  bool differs = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.next();
    CHECK(x == b.next());
    if (x != c.next()) differs = true;
  }
  CHECK(differs);

  CounterRng u(991, 0);
  double mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    mean += x;
  }
  mean /= 20000.0;
  CHECK(std::fabs(mean - 0.5) < 0.01);
}

TEST_CASE("sample paths respect the light sequence and the reflection") {
  const ModelParams params = make_params(0.35, 2);
  const long long n = 2000;
  const std::vector<int> path = sample_path(params, n, 555);
  REQUIRE(path.size() == static_cast<size_t>(n + 1));
  CHECK(path[0] == 0);

  for (long long t = 1; t <= n; ++t) {
    const int step = path[t] - path[t - 1];
    const bool red = (t - 1) % (2 * params.ell) < params.ell;
    CHECK(path[t] >= 0);
    if (red) {
      CHECK((step == 0 || step == 1));
    } else {
      CHECK((step == 0 || step == -1));
      if (path[t - 1] == 0) CHECK(step == 0);
    }
  }
}

TEST_CASE("simulate_walk is deterministic in the seed") {
  SimConfig config;
  config.params = make_params(0.3, 1);
  config.n = 4000;
  config.replicates = 64;
  config.seed = 2024;

  const MaxEmpirical one = simulate_walk(config);
  const MaxEmpirical two = simulate_walk(config);
  CHECK(one.replicates == 64);
  CHECK(one.counts == two.counts);

  // A different master seed rewires every slot draw.
  CHECK(sample_path(config.params, 4000, 2024) ==
        sample_path(config.params, 4000, 2024));
  CHECK(sample_path(config.params, 4000, 2024) !=
        sample_path(config.params, 4000, 2025));
}

TEST_CASE("replicate streams do not depend on the thread split") {
  SimConfig config;
  config.params = make_params(0.3, 2);
  config.n = 4000;
  config.replicates = 40;
  config.seed = 77;

  setenv("CLUMPQ_THREADS", "1", 1);
  const MaxEmpirical serial = simulate_walk(config);
  setenv("CLUMPQ_THREADS", "7", 1);
  const MaxEmpirical parallel = simulate_walk(config);
  unsetenv("CLUMPQ_THREADS");
  CHECK(serial.counts == parallel.counts);
}

TEST_CASE("empirical cdf arithmetic on a hand-built table") {
  MaxEmpirical emp;
  emp.replicates = 20;
  emp.counts = {{2, 5}, {3, 15}};
  CHECK(emp.cdf(1) == 0.0);
  CHECK(emp.cdf(2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(emp.cdf(3) == 1.0);
  CHECK(emp.cdf(10) == 1.0);
  CHECK(emp.std_error_at(2) ==
        doctest::Approx(std::sqrt(0.25 * 0.75 / 20.0)).epsilon(1e-15));
  CHECK(emp.std_error_at(3) == 0.0);
}

TEST_CASE("simulated maximum tracks the predicted law") {
  SimConfig config;
  config.params = make_params(0.3, 1);
  config.n = 40000;
  config.replicates = 800;
  config.seed = 31337;

  const MaxEmpirical emp = simulate_walk(config);
  const MaxPrediction pred = predict_max_cdf(config.params, config.n);
  int checked = 0;
  for (int m = pred.m_lo; m <= pred.m_hi; ++m) {
    const double want = pred.cdf[static_cast<size_t>(m - pred.m_lo)];
    if (want < 0.1 || want > 0.9) continue;
    // Wide gate: 4 sigma plus room for the O(1/n) bias of the asymptotic
    // law at this short horizon. The acceptance run tightens this.
    CHECK(std::fabs(emp.cdf(m) - want) <
          4.0 * emp.std_error_at(m) + 0.04);
    ++checked;
  }
  CHECK(checked >= 1);
}

TEST_CASE("cycle-sampled occupancy matches the stationary law") {
  SimConfig config;
  config.params = make_params(0.3, 2);
  config.n = 1000000;
  config.replicates = 1;
  config.seed = 90210;

  const StationaryEmpirical emp =
      estimate_stationary(config, CycleOrder::RedFirst, 10000);
  REQUIRE(!emp.occupancy.empty());
  CHECK(emp.samples == (1000000 - 10000) / 4 + 1);  // both endpoints sampled
  double total = 0.0;
  for (double f : emp.occupancy) total += f;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(emp.pi0_std_error > 0.0);

  const double want = pi_closed(config.params, CycleOrder::RedFirst, 0);
  CHECK(std::fabs(emp.occupancy[0] - want) < 5.0 * emp.pi0_std_error);

  CHECK_THROWS_AS(estimate_stationary(config, CycleOrder::RedFirst, 2000000),
                  std::invalid_argument);
}

TEST_CASE("clump sojourn estimate brackets the expected size") {
  SimConfig config;
  config.params = make_params(0.3, 1);
  config.n = 2000000;
  config.replicates = 1;
  config.seed = 424242;

  const SojournEmpirical soj = estimate_sojourn(config);
  CHECK(soj.clumps > 100);
  CHECK(soj.level > 0);
  CHECK(soj.mean >= 1.0);  // a clump contains at least the visit that opened it
  // The windowing that delimits clumps biases the mean a little, so this
  // check carries the same absolute slack the verification suite uses.
  CHECK(std::fabs(soj.mean - 2.5) < 3.0 * soj.std_error + 0.2);
}

TEST_CASE("horizons that break the cycle grid are rejected") {
  SimConfig config;
  config.params = make_params(0.3, 2);
  config.n = 4001;  // not a multiple of 2*ell
  config.replicates = 4;
  config.seed = 1;
  CHECK_THROWS_AS(simulate_walk(config), std::invalid_argument);
  config.n = 0;
  CHECK_THROWS_AS(simulate_walk(config), std::invalid_argument);
  config.n = 4000;
  config.replicates = 0;
  CHECK_THROWS_AS(simulate_walk(config), std::invalid_argument);
}

TEST_CASE("thread cap reads the environment override") {
  setenv("CLUMPQ_THREADS", "3", 1);
  CHECK(thread_cap() == 3);
  unsetenv("CLUMPQ_THREADS");
  CHECK(thread_cap() >= 1);
}
