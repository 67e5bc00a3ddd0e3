#pragma once

#include "trocar/config.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace trocar {

struct TrialRow {
  double t = 0.0;
  JointVector q;
  double force_true = 0.0;       // N
  double force_estimated = 0.0;  // N
  std::array<double, kNumTerms> costs{};
  double total_cost = 0.0;
  double solve_time = 0.0;  // s
  int iterations = 0;
  bool converged = true;
  bool in_contact = false;
  double trocar_displacement = 0.0;  // m
  // Per-cycle box, kept so feasibility can be audited after the fact.
  JointVector lower;
  JointVector upper;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  bool ff_enabled = false;
  std::vector<TrialRow> rows;
  double completion_time = 0.0;  // T, s
  bool success = false;
  bool aborted = false;
  std::string cause;
  double metric_m = 0.0;  // N

  double meanSolveTime() const;
  double medianSolveTime() const;
  double maxSolveTime() const;
};

// (1/T) * trapezoidal integral of |f| over [0, T]. The series must start at
// t <= 0 and reach T; samples past T are ignored.
double metricM(const std::vector<std::pair<double, double>>& force_norm_series, double T);

TrialRecord runTrial(const TrialConfig& config);

struct ArmSummary {
  std::vector<std::uint64_t> seeds;  // seeds counted in the statistics
  std::vector<double> m_values;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  int success_count = 0;
  int trial_count = 0;
  std::vector<std::string> excluded;  // "seed: reason"
};

struct BenchSummary {
  ArmSummary with_ff;
  ArmSummary without_ff;
  double ratio_of_means = 0.0;  // with / without
  // All trials ordered by seed, without-FF first within a seed.
  std::vector<TrialRecord> trials;
};

// Paired trials: each seed runs once with and once without force feedback.
// Trials run concurrently when threads > 1; results are merged in seed order.
BenchSummary runBench(const TrialConfig& config, const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

// Aggregates already-run trials; exposed for testing the statistics.
BenchSummary summarize(std::vector<TrialRecord> trials);

}  // namespace trocar
