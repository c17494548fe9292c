#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "clumpq/commands.hpp"
#include "clumpq/errors.hpp"
#include "clumpq/model.hpp"
#include "clumpq/report.hpp"

namespace {

int emit(const clumpq::Report& report, const std::string& format,
         const std::string& out_path) {
  const std::string payload =
      format == "csv" ? clumpq::to_csv(report) : clumpq::to_json(report);
  if (out_path.empty()) {
    std::fputs(payload.c_str(), stdout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "error: cannot open %s for writing\n",
                   out_path.c_str());
      return 2;
    }
    out << payload;
  }
  return report.ok ? 0 : 3;
}

void fail(const char* type, const char* message) {
  std::fprintf(stderr, "{\"error\": {\"type\": \"%s\", \"message\": \"%s\"}}\n",
               type, message);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Traffic-light queue analytics: stationary laws, clump rates, and"
      " predictions for the maximum queue length"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "json";
  std::string out_path;
  std::uint64_t seed = clumpq::kDefaultSeed;
  app.add_option("--format", format, "Report encoding")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", out_path, "Write the report to this file");
  app.add_option("--seed", seed, "Master seed for randomized commands")
      ->capture_default_str();

  double p = 0.3;
  int ell = 1;
  long long n = 100000;
  std::string order = "red-first";
  int truncation = 400;
  int replicates = 2000;
  bool record_clumps = false;
  int ell_max = 3;
  bool quick = false;

  CLI::App* stationary =
      app.add_subcommand("stationary", "Stationary law of the sampled chain");
  stationary->add_option("--p", p, "Arrival probability, 0 < p < 0.5")
      ->required();
  stationary->add_option("--ell", ell, "Block length")->capture_default_str();
  stationary->add_option("--order", order, "Sampling instant")
      ->check(CLI::IsMember({"red-first", "green-first"}))
      ->capture_default_str();
  stationary->add_option("--m", truncation, "Direct-solve truncation")
      ->capture_default_str();

  CLI::App* clump = app.add_subcommand(
      "clump", "Hitting probabilities, clump rates, and epsilons");
  clump->add_option("--p", p, "Arrival probability, 0 < p < 0.5")->required();
  clump->add_option("--ell", ell, "Block length")->capture_default_str();

  CLI::App* predict = app.add_subcommand(
      "predict", "Predicted distribution of the maximum over n slots");
  predict->add_option("--p", p, "Arrival probability, 0 < p < 0.5")
      ->required();
  predict->add_option("--ell", ell, "Block length")->capture_default_str();
  predict->add_option("--n", n, "Horizon in slots")->capture_default_str();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Empirical law of the maximum next to the prediction");
  simulate->add_option("--p", p, "Arrival probability, 0 < p < 0.5")
      ->required();
  simulate->add_option("--ell", ell, "Block length")->capture_default_str();
  simulate->add_option("--n", n, "Horizon in slots")->capture_default_str();
  simulate->add_option("--replicates", replicates, "Independent runs")
      ->capture_default_str();
  simulate->add_flag("--record-clumps", record_clumps,
                     "Also estimate the mean clump sojourn");

  CLI::App* verify =
      app.add_subcommand("verify", "Cross-validation suite over the grid");
  verify->add_option("--ell-max", ell_max,
                     "Report unproven ratio gaps up to this block length")
      ->capture_default_str();
  verify->add_flag("--quick", quick, "Analytic checks only, no Monte Carlo");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    clumpq::Report report;
    if (stationary->parsed()) {
      const clumpq::CycleOrder cycle_order = order == "green-first"
                                                 ? clumpq::CycleOrder::GreenFirst
                                                 : clumpq::CycleOrder::RedFirst;
      report = clumpq::cmd_stationary(p, ell, cycle_order, truncation);
    } else if (clump->parsed()) {
      report = clumpq::cmd_clump(p, ell);
    } else if (predict->parsed()) {
      report = clumpq::cmd_predict(p, ell, n);
    } else if (simulate->parsed()) {
      report = clumpq::cmd_simulate(p, ell, n, replicates, seed, record_clumps);
    } else {
      report = clumpq::cmd_verify(ell_max, quick, seed);
    }
    return emit(report, format, out_path);
  } catch (const std::invalid_argument& e) {
    fail("usage", e.what());
    return 1;
  } catch (const clumpq::StructuralError& e) {
    fail("structural", e.what());
    return 2;
  } catch (const std::exception& e) {
    fail("internal", e.what());
    return 2;
  }
}
