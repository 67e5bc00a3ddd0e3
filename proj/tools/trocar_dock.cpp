// trocar-dock: run single docking trials, paired with/without force-feedback
// benchmarks, and gradient self-checks.

#include "trocar/config.hpp"
#include "trocar/harness.hpp"
#include "trocar/records.hpp"
#include "trocar/self_check.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;

std::vector<std::uint64_t> parseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const auto value = std::stoull(item, &used);
    if (used != item.size()) throw trocar::ConfigError("bad seed '" + item + "'");
    seeds.push_back(value);
  }
  return seeds;
}

void printArm(const char* name, const trocar::ArmSummary& arm) {
  std::printf("  %-11s success %d/%d  M = %.4f +/- %.4f N  (", name, arm.success_count, arm.trial_count, arm.mean,
              arm.stddev);
  for (std::size_t i = 0; i < arm.m_values.size(); ++i) std::printf("%s%.4f", i ? ", " : "", arm.m_values[i]);
  std::printf(")\n");
  for (const auto& e : arm.excluded) std::printf("    excluded %s\n", e.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal-control trocar docking: trials, benchmarks and self-checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run one docking trial");
  std::uint64_t run_seed = 0;
  std::string ff = "on";
  bool run_timing = true;
  run->add_option("--config", config_path, "Trial config (JSON)")->required();
  auto* seed_opt = run->add_option("--seed", run_seed, "Noise seed (overrides config)");
  run->add_option("--ff", ff, "Force feedback")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--out", out_dir, "Directory for the trial JSONL");
  run->add_flag("--timing,!--no-timing", run_timing, "Record wall-clock solve times (default on)");

  auto* bench = app.add_subcommand("bench", "Paired with/without force-feedback benchmark");
  int trials = 5;
  std::string seeds_text;
  unsigned threads = 0;
  bool bench_timing = false;
  bench->add_option("--config", config_path, "Trial config (JSON)")->required();
  bench->add_option("--trials", trials, "Number of paired trials")->required()->check(CLI::PositiveNumber);
  bench->add_option("--seeds", seeds_text, "Comma-separated seeds (default 1..N)");
  bench->add_option("--out", out_dir, "Output directory")->required();
  bench->add_option("--threads", threads, "Worker threads (0 = hardware)");
  bench->add_flag("--timing", bench_timing, "Write wall-clock solve times (makes outputs non-reproducible)");

  auto* check = app.add_subcommand("check", "Gradient and Jacobian self-tests");
  int configurations = 100;
  check->add_option("--config", config_path, "Trial config (JSON)")->required();
  check->add_option("--samples", configurations, "Random configurations")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  trocar::TrialConfig config;
  try {
    config = trocar::loadConfigFile(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  try {
    if (*run) {
      if (*seed_opt) config.seed = run_seed;
      config.ff_enabled = ff == "on";
      const trocar::TrialRecord rec = trocar::runTrial(config);
      std::printf("seed %llu ff %s: %s  T = %.3f s  M = %.4f N  solve median %.3f ms max %.3f ms\n",
                  static_cast<unsigned long long>(rec.seed), ff.c_str(),
                  rec.success ? "docked" : (rec.aborted ? "aborted" : "not docked"), rec.completion_time,
                  rec.metric_m, 1e3 * rec.medianSolveTime(), 1e3 * rec.maxSolveTime());
      if (!rec.cause.empty()) std::printf("  cause: %s\n", rec.cause.c_str());
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(std::filesystem::path(out_dir) / trocar::trialFileName(rec));
        trocar::writeTrialJsonl(f, rec, {run_timing});
      }
      return rec.aborted ? kExitAbort : kExitOk;
    }

    if (*bench) {
      std::vector<std::uint64_t> seeds;
      if (!seeds_text.empty()) {
        seeds = parseSeeds(seeds_text);
        if (static_cast<int>(seeds.size()) != trials) {
          std::fprintf(stderr, "config error: --seeds lists %zu seeds but --trials is %d\n", seeds.size(), trials);
          return kExitConfig;
        }
      } else {
        for (int i = 1; i <= trials; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
      }
      const trocar::BenchSummary summary = trocar::runBench(config, seeds, threads);
      trocar::writeBenchOutputs(out_dir, summary, {bench_timing});
      std::printf("bench: %d paired trials\n", trials);
      printArm("without FF", summary.without_ff);
      printArm("with FF", summary.with_ff);
      std::printf("  ratio of means (with / without) = %.4f\n", summary.ratio_of_means);
      for (const auto& t : summary.trials) {
        if (t.aborted) return kExitAbort;
      }
      return kExitOk;
    }

    if (*check) {
      const trocar::SelfCheckReport rep = trocar::runSelfCheck(config.chain, config.limits, configurations);
      std::printf("self-check over %d configurations\n", rep.configurations);
      std::printf("  J_lin       rel err %.3e (tol %.0e)\n", rep.jacobian_error, rep.jacobian_tolerance);
      for (int i = 0; i < trocar::kNumTerms; ++i) {
        std::printf("  grad c%d     rel err %.3e (tol %.0e)\n", i + 1, rep.gradient_error[static_cast<std::size_t>(i)],
                    rep.gradient_tolerance);
      }
      std::printf("%s\n", rep.passed() ? "PASS" : "FAIL");
      return rep.passed() ? kExitOk : kExitCheckFailed;
    }
  } catch (const trocar::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitAbort;
  }
  return kExitOk;
}
