#include "trocar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace trocar {

double TrialRecord::meanSolveTime() const {
  if (rows.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) sum += rows[i].solve_time;
  return sum / static_cast<double>(rows.size() - 1);
}

double TrialRecord::medianSolveTime() const {
  if (rows.size() < 2) return 0.0;
  std::vector<double> times;
  times.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) times.push_back(rows[i].solve_time);
  const auto mid = times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2);
  std::nth_element(times.begin(), mid, times.end());
  if (times.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(times.begin(), mid);
  return 0.5 * (lower + upper);
}

double TrialRecord::maxSolveTime() const {
  double m = 0.0;
  for (const auto& row : rows) m = std::max(m, row.solve_time);
  return m;
}

double metricM(const std::vector<std::pair<double, double>>& series, double T) {
  if (series.empty()) throw std::invalid_argument("metric M: empty force series");
  if (!(T > 0.0)) throw std::invalid_argument("metric M: T must be positive");
  const double tol = 1e-9 * std::max(1.0, T);
  if (series.front().first > tol || series.back().first < T - tol) {
    throw std::invalid_argument("metric M: series does not cover [0, T]");
  }
  double integral = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const auto& [t0, f0] = series[i - 1];
    const auto& [t1, f1] = series[i];
    if (t1 < t0) throw std::invalid_argument("metric M: timestamps must be non-decreasing");
    if (t0 >= T) break;
    if (t1 <= 0.0) continue;
    integral += 0.5 * (f0 + f1) * (t1 - t0);
  }
  return integral / T;
}

namespace {

TaskParams buildTaskParams(const TrialConfig& config, const Observation& obs) {
  TaskParams p;
  p.axis_anchor = obs.measured.center;
  p.insertion_axis = obs.measured.axis;
  p.goal = obs.measured.center + config.goalDepth() * obs.measured.axis;
  p.admittance_ref = obs.tip;
  p.q_prev = obs.q_c;
  p.weights = config.weights;
  p.c5_smoothing = config.epsilon_c5;
  p.setForceFeedback(config.ff_enabled);
  return p;
}

double estimatedForceNorm(const KinematicChain& chain, const Observation& obs, double damping, ForceEstimate* out) {
  try {
    ForceEstimate est = estimateTipForce(chain, obs.q_c, obs.tau_ext, damping);
    if (out) *out = est;
    return est.f_ext.norm();
  } catch (const std::domain_error&) {
    if (out) *out = ForceEstimate{};
    return 0.0;
  }
}

TrialRow baseRow(double t, const Observation& obs, const TrocarState& trocar, const TrocarModel& model) {
  TrialRow row;
  row.t = t;
  row.q = obs.q_c;
  row.force_true = obs.force_norm;
  row.in_contact = obs.contact.in_contact;
  row.trocar_displacement = (trocar.center - model.rest_center).norm();
  row.lower = obs.q_c;
  row.upper = obs.q_c;
  return row;
}

}  // namespace

TrialRecord runTrial(const TrialConfig& config) {
  config.validate();
  TrialRecord rec;
  rec.seed = config.seed;
  rec.ff_enabled = config.ff_enabled;

  NoiseModel noise = config.noise;
  noise.seed = config.seed;
  const TrocarModel trocar = config.resolvedTrocar();
  DockingSim sim(config.chain, config.limits, config.endoscope, trocar, noise, config.sim, config.initial_q);
  SqpSolver solver(config.solver);

  AdmittanceState admittance;
  admittance.params = config.admittance;

  const double dt = config.sim.dt;
  const auto max_steps = static_cast<long>(std::floor(config.t_max / dt + 1e-9));

  Observation obs = sim.observe();
  {
    TrialRow row = baseRow(0.0, obs, sim.trocarState(), trocar);
    row.force_estimated = estimatedForceNorm(config.chain, obs, config.estimator_damping, nullptr);
    rec.rows.push_back(std::move(row));
  }

  long step = 0;
  while (!obs.success && step < max_steps) {
    TaskParams params = buildTaskParams(config, obs);
    ForceEstimate estimate;
    estimatedForceNorm(config.chain, obs, config.estimator_damping, &estimate);
    if (config.ff_enabled) {
      admittance = admittanceUpdate(admittance, obs.tip, estimate, dt);
      params.admittance_ref = admittance.r;
    }

    const StepBoundsResult box = stepBounds(config.limits, obs.q_c, dt);
    SolveOutcome outcome;
    try {
      outcome = solver.solve(config.chain, params, box.bounds);
    } catch (const std::exception& e) {
      rec.aborted = true;
      rec.cause = std::string("solver failure: ") + e.what();
      break;
    }
    if (!outcome.q_star.allFinite() || !std::isfinite(outcome.final_total_cost)) {
      rec.aborted = true;
      rec.cause = "solver failure: non-finite solution";
      break;
    }

    try {
      obs = sim.step(outcome.q_star);
    } catch (const std::exception& e) {
      rec.aborted = true;
      rec.cause = std::string("simulation failure: ") + e.what();
      break;
    }
    ++step;

    TrialRow row = baseRow(static_cast<double>(step) * dt, obs, sim.trocarState(), trocar);
    row.force_estimated = estimatedForceNorm(config.chain, obs, config.estimator_damping, nullptr);
    const CostReport costs = totalObjective(outcome.q_star, params, config.chain);
    row.costs = costs.values;
    row.total_cost = costs.total;
    row.solve_time = outcome.solve_time;
    row.iterations = outcome.iterations;
    row.converged = outcome.converged;
    row.lower = box.bounds.lower;
    row.upper = box.bounds.upper;
    row.q = outcome.q_star;
    rec.rows.push_back(std::move(row));
  }

  rec.success = !rec.aborted && obs.success;
  rec.completion_time = rec.rows.back().t;
  if (rec.completion_time > 0.0) {
    std::vector<std::pair<double, double>> series;
    series.reserve(rec.rows.size());
    for (const auto& row : rec.rows) series.emplace_back(row.t, row.force_true);
    rec.metric_m = metricM(series, rec.completion_time);
  } else {
    rec.metric_m = rec.rows.front().force_true;
  }
  if (!rec.success && !rec.aborted) rec.cause = "no insertion within t_max";
  return rec;
}

namespace {

void finishArm(ArmSummary& arm) {
  const auto k = arm.m_values.size();
  if (k == 0) return;
  arm.mean = std::accumulate(arm.m_values.begin(), arm.m_values.end(), 0.0) / static_cast<double>(k);
  if (k > 1) {
    double ss = 0.0;
    for (double m : arm.m_values) ss += (m - arm.mean) * (m - arm.mean);
    arm.stddev = std::sqrt(ss / static_cast<double>(k - 1));
  }
}

}  // namespace

BenchSummary summarize(std::vector<TrialRecord> trials) {
  std::stable_sort(trials.begin(), trials.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (a.seed != b.seed) return a.seed < b.seed;
    return !a.ff_enabled && b.ff_enabled;
  });
  BenchSummary out;
  for (const auto& t : trials) {
    ArmSummary& arm = t.ff_enabled ? out.with_ff : out.without_ff;
    ++arm.trial_count;
    if (t.success) {
      ++arm.success_count;
      arm.seeds.push_back(t.seed);
      arm.m_values.push_back(t.metric_m);
    } else {
      arm.excluded.push_back(std::to_string(t.seed) + ": " + (t.cause.empty() ? "failed" : t.cause));
    }
  }
  finishArm(out.with_ff);
  finishArm(out.without_ff);
  out.ratio_of_means = out.without_ff.mean > 0.0 ? out.with_ff.mean / out.without_ff.mean
                                                 : std::numeric_limits<double>::quiet_NaN();
  out.trials = std::move(trials);
  return out;
}

BenchSummary runBench(const TrialConfig& config, const std::vector<std::uint64_t>& seeds, unsigned threads) {
  if (seeds.empty()) throw std::invalid_argument("bench: need at least one trial");
  config.validate();

  std::vector<TrialConfig> jobs;
  for (auto seed : seeds) {
    for (bool ff : {false, true}) {
      TrialConfig c = config;
      c.seed = seed;
      c.ff_enabled = ff;
      jobs.push_back(std::move(c));
    }
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<TrialRecord> results(jobs.size());
  if (threads == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = runTrial(jobs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        try {
          results[i] = runTrial(jobs[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const auto count = std::min<std::size_t>(threads, jobs.size());
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return summarize(std::move(results));
}

}  // namespace trocar
