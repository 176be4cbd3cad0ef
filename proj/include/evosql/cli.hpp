#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "evosql/config.hpp"
#include "evosql/diversity.hpp"
#include "evosql/errors.hpp"
#include "evosql/eval.hpp"

namespace evosql {

struct RunArgs {
  std::string predictions_path = "predictions.jsonl";
  std::string trace_dir;          // empty disables trace files
  std::vector<int64_t> only_ids;  // empty selects every task
  bool quiet = false;
};

// Runs the full pipeline per task and writes line-delimited predictions
// ({"question_id", "sql"} or {"failed", "question_id"}) plus one trace file
// per task. Deterministic bytes for deterministic backends.
void cmd_run(const RunConfig& config, const RunArgs& args);

struct EvalArgs {
  std::string predictions_path;
  std::string report_path;  // key=value metrics; empty disables
  std::string csv_path;     // per-record CSV; empty disables
  bool quiet = false;
};

// Scores a predictions file against the dataset. Unknown question ids are
// errors. Prints the per-tier table; optionally writes metrics files.
EvalSummary cmd_eval(const RunConfig& config, const EvalArgs& args);

struct AblateArgs {
  std::vector<std::string> trace_paths;
  std::string csv_path;  // empty disables
  bool quiet = false;
};

struct AblateResult {
  // one summary per strategy, in Strategy declaration order
  std::array<EvalSummary, 4> summaries;
  std::string table_text;
};

// Re-votes stored buffers under all four strategies (no LLM calls) and
// reports per-tier EX for each. Traces whose buffer is empty without a
// recorded failure are rejected with TraceWithoutBuffer.
AblateResult cmd_ablate(const RunConfig& config, const AblateArgs& args);

struct DiversityArgs {
  int task_count = 50;
  int n = 20;
  std::vector<double> temperatures = {0.0, 0.3, 0.7, 1.0};
  std::string csv_path;  // empty disables
  bool quiet = false;
};

DiversityOutcome cmd_diversity(const RunConfig& config, const DiversityArgs& args);

// Maps an error to the process exit code: 1 usage/config, 2 dataset,
// 3 backend failure.
int exit_code_for(ErrorKind kind);

}  // namespace evosql
