#include "trocar/records.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace trocar {

namespace {

using nlohmann::json;

json arr(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string formatDouble(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void writeTrialJsonl(std::ostream& out, const TrialRecord& record, const RecordOptions& options) {
  for (const auto& row : record.rows) {
    json j = {{"kind", "step"},
              {"t", row.t},
              {"q", arr(row.q)},
              {"f_true", row.force_true},
              {"f_est", row.force_estimated},
              {"costs", row.costs},
              {"total_cost", row.total_cost},
              {"solve_time", options.include_timing ? json(row.solve_time) : json(nullptr)},
              {"iterations", row.iterations},
              {"converged", row.converged},
              {"in_contact", row.in_contact},
              {"trocar_disp", row.trocar_displacement},
              {"lower", arr(row.lower)},
              {"upper", arr(row.upper)}};
    out << j.dump() << '\n';
  }
  json summary = {{"kind", "summary"},
                  {"seed", record.seed},
                  {"ff", record.ff_enabled},
                  {"T", record.completion_time},
                  {"success", record.success},
                  {"aborted", record.aborted},
                  {"cause", record.cause},
                  {"M", record.metric_m}};
  out << summary.dump() << '\n';
}

TrialRecord readTrialJsonl(std::istream& in) {
  TrialRecord rec;
  std::string line;
  bool have_summary = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "step") {
      TrialRow row;
      row.t = j.at("t").get<double>();
      row.q = vec(j.at("q"));
      row.force_true = j.at("f_true").get<double>();
      row.force_estimated = j.at("f_est").get<double>();
      row.costs = j.at("costs").get<std::array<double, kNumTerms>>();
      row.total_cost = j.at("total_cost").get<double>();
      row.solve_time = j.at("solve_time").is_null() ? 0.0 : j.at("solve_time").get<double>();
      row.iterations = j.at("iterations").get<int>();
      row.converged = j.at("converged").get<bool>();
      row.in_contact = j.at("in_contact").get<bool>();
      row.trocar_displacement = j.at("trocar_disp").get<double>();
      row.lower = vec(j.at("lower"));
      row.upper = vec(j.at("upper"));
      rec.rows.push_back(std::move(row));
    } else if (kind == "summary") {
      rec.seed = j.at("seed").get<std::uint64_t>();
      rec.ff_enabled = j.at("ff").get<bool>();
      rec.completion_time = j.at("T").get<double>();
      rec.success = j.at("success").get<bool>();
      rec.aborted = j.at("aborted").get<bool>();
      rec.cause = j.at("cause").get<std::string>();
      rec.metric_m = j.at("M").get<double>();
      have_summary = true;
    } else {
      throw std::runtime_error("trial record: unknown line kind '" + kind + "'");
    }
  }
  if (!have_summary) throw std::runtime_error("trial record: missing summary line");
  return rec;
}

std::string trialFileName(const TrialRecord& record) {
  return "trial_" + std::to_string(record.seed) + "_" + (record.ff_enabled ? "on" : "off") + ".jsonl";
}

void writeSummaryCsv(std::ostream& out, const BenchSummary& summary, const RecordOptions& options) {
  out << "seed,ff,success,T_s,M_N,mean_solve_ms\n";
  for (const auto& t : summary.trials) {
    out << t.seed << ',' << (t.ff_enabled ? "on" : "off") << ',' << (t.success ? 1 : 0) << ','
        << formatDouble(t.completion_time) << ',' << formatDouble(t.metric_m) << ','
        << (options.include_timing ? formatDouble(1e3 * t.meanSolveTime()) : std::string("nan")) << '\n';
  }
}

void writeBenchOutputs(const std::filesystem::path& dir, const BenchSummary& summary, const RecordOptions& options) {
  std::filesystem::create_directories(dir);
  for (const auto& t : summary.trials) {
    std::ofstream f(dir / trialFileName(t));
    if (!f) throw std::runtime_error("cannot write " + (dir / trialFileName(t)).string());
    writeTrialJsonl(f, t, options);
  }
  std::ofstream csv(dir / "summary.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
  writeSummaryCsv(csv, summary, options);
}

}  // namespace trocar
