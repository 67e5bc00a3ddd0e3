#pragma once

#include "trocar/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace trocar {

struct RecordOptions {
  // Wall-clock solve times vary run to run; when false they are written as
  // null / nan so outputs are reproducible byte for byte.
  bool include_timing = false;
};

// One JSON object per line: every step row ("kind":"step"), then a final
// "kind":"summary" line with T, success and M. Doubles round-trip exactly.
void writeTrialJsonl(std::ostream& out, const TrialRecord& record, const RecordOptions& options = {});
TrialRecord readTrialJsonl(std::istream& in);

std::string trialFileName(const TrialRecord& record);

// summary.csv: seed,ff,success,T_s,M_N,mean_solve_ms with 17 significant
// digits.
void writeSummaryCsv(std::ostream& out, const BenchSummary& summary, const RecordOptions& options = {});

// Writes trial_<seed>_<on|off>.jsonl for each trial and summary.csv.
void writeBenchOutputs(const std::filesystem::path& dir, const BenchSummary& summary,
                       const RecordOptions& options = {});

std::string formatDouble(double value);

}  // namespace trocar
