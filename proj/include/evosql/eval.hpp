#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evosql/executor.hpp"
#include "evosql/schema.hpp"

namespace evosql {

struct BirdDev {
  std::vector<Task> tasks;
  size_t skipped = 0;  // malformed records
};

// Reads <root>/dev.json (question_id, db_id, question, evidence, SQL,
// difficulty). Malformed records are skipped and counted. Throws
// MissingDataset when dev.json or dev_databases/ is absent.
BirdDev load_bird_dev(const std::string& root);

// <root>/dev_databases/<db_id>/<db_id>.sqlite
std::string bird_db_path(const std::string& root, const std::string& db_id);

// True iff both queries produce equal output keys on the database. Order
// sensitivity follows the gold query's top-level ORDER BY. A prediction
// that fails to execute scores false; a gold that fails to execute throws
// ErroredExecution (callers mark the record invalid).
bool execution_accuracy(const std::string& pred_sql, const std::string& gold_sql,
                        const std::string& db_path, const ExecLimits& limits = {});

// Partial-credit row match. Cells are normalized and each row treated as a
// cell multiset; prediction rows greedily match the untaken gold row with
// maximal overlap. With M the matched pairs and overlap o(p,g):
//   tp = sum o/max(|p|,|g|)
//   fp = (|pred| - |M|) + sum (|p| - o)/max(|p|,|g|)
//   fn = (|gold| - |M|) + sum (|g| - o)/max(|p|,|g|)
//   F1 = 2tp / (2tp + fp + fn)
// Empty vs empty is 1.0; empty vs nonempty is 0.0.
double soft_f1(const std::vector<Row>& pred_rows, const std::vector<Row>& gold_rows);

struct EvalRecord {
  int64_t question_id = -1;
  std::optional<Tier> tier;
  bool parsed = true;   // false when the prediction is a failure marker
  bool gold_ok = true;  // false when the gold query did not execute
  bool ex = false;
  double soft_f1 = 0.0;
  std::string note;
};

// Executes gold and prediction and fills an EvalRecord. Gold execution
// failure marks the record invalid (gold_ok=false) instead of throwing.
EvalRecord score_prediction(const Task& task, const std::optional<std::string>& pred_sql,
                            const std::string& db_path, const ExecLimits& limits = {});

struct TierStats {
  size_t count = 0;
  double ex_pct = 0.0;
  double soft_f1_pct = 0.0;
};

struct EvalSummary {
  std::array<TierStats, 3> tiers;  // simple, moderate, challenging
  TierStats overall;
  size_t invalid_gold = 0;  // records excluded from every denominator
};

// Percentages recompute exactly from the records; records with gold_ok=false
// are excluded and counted. Records without a tier only contribute to the
// overall row.
EvalSummary aggregate_report(const std::vector<EvalRecord>& records);

// Two-decimal percentage rendering, e.g. 61.06.
std::string format_pct(double pct);

std::string render_summary_text(const EvalSummary& summary);
std::string render_summary_kv(const EvalSummary& summary);

}  // namespace evosql
