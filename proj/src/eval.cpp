#include "evosql/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "evosql/errors.hpp"
#include "evosql/sqltext.hpp"
#include "evosql/util.hpp"
#include "json.hpp"

namespace evosql {

std::string bird_db_path(const std::string& root, const std::string& db_id) {
  return (std::filesystem::path(root) / "dev_databases" / db_id / (db_id + ".sqlite")).string();
}

BirdDev load_bird_dev(const std::string& root) {
  std::filesystem::path dev_json = std::filesystem::path(root) / "dev.json";
  std::filesystem::path databases = std::filesystem::path(root) / "dev_databases";
  if (!std::filesystem::exists(dev_json) || !std::filesystem::is_directory(databases))
    throw Error(ErrorKind::MissingDataset, "expected dev.json and dev_databases/ under " + root);

  auto doc = nlohmann::json::parse(read_text_file(dev_json.string()), nullptr, false);
  if (!doc.is_array()) throw Error(ErrorKind::MissingDataset, "dev.json is not a JSON array");

  BirdDev out;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("question_id") || !item["question_id"].is_number() ||
        !item.contains("db_id") || !item["db_id"].is_string() || !item.contains("question") ||
        !item["question"].is_string() || item["question"].get<std::string>().empty()) {
      ++out.skipped;
      continue;
    }
    Task task;
    task.question_id = item["question_id"].get<int64_t>();
    task.db_id = item["db_id"].get<std::string>();
    task.question = item["question"].get<std::string>();
    if (item.contains("evidence") && item["evidence"].is_string())
      task.hint = item["evidence"].get<std::string>();
    if (item.contains("SQL") && item["SQL"].is_string())
      task.gold_sql = item["SQL"].get<std::string>();
    if (item.contains("difficulty") && item["difficulty"].is_string())
      task.difficulty_tier = parse_tier(item["difficulty"].get<std::string>());
    out.tasks.push_back(std::move(task));
  }
  return out;
}

bool execution_accuracy(const std::string& pred_sql, const std::string& gold_sql,
                        const std::string& db_path, const ExecLimits& limits) {
  ExecutionResult gold = execute(gold_sql, db_path, limits);
  if (!gold.ok())
    throw Error(ErrorKind::ErroredExecution, "gold query failed: " + gold.error->message);
  ExecutionResult pred = execute(pred_sql, db_path, limits);
  if (!pred.ok()) return false;
  bool order_sensitive = has_toplevel_order_by(gold_sql);
  return output_key(pred, order_sensitive) == output_key(gold, order_sensitive);
}

namespace {

using CellCounts = std::map<std::string, size_t>;

CellCounts cell_multiset(const Row& row) {
  CellCounts counts;
  for (const auto& value : row) ++counts[normalize_cell(value)];
  return counts;
}

size_t overlap(const CellCounts& a, const CellCounts& b) {
  size_t n = 0;
  for (const auto& [cell, count] : a) {
    auto it = b.find(cell);
    if (it != b.end()) n += std::min(count, it->second);
  }
  return n;
}

}  // namespace

double soft_f1(const std::vector<Row>& pred_rows, const std::vector<Row>& gold_rows) {
  if (pred_rows.empty() && gold_rows.empty()) return 1.0;
  if (pred_rows.empty() || gold_rows.empty()) return 0.0;

  std::vector<CellCounts> pred, gold;
  pred.reserve(pred_rows.size());
  gold.reserve(gold_rows.size());
  for (const auto& row : pred_rows) pred.push_back(cell_multiset(row));
  for (const auto& row : gold_rows) gold.push_back(cell_multiset(row));
  std::vector<size_t> pred_width, gold_width;
  for (const auto& row : pred_rows) pred_width.push_back(row.size());
  for (const auto& row : gold_rows) gold_width.push_back(row.size());

  std::vector<bool> taken(gold.size(), false);
  double tp = 0.0, fp = 0.0, fn = 0.0;
  size_t matched = 0;

  for (size_t i = 0; i < pred.size(); ++i) {
    size_t best = gold.size();
    size_t best_overlap = 0;
    for (size_t j = 0; j < gold.size(); ++j) {
      if (taken[j]) continue;
      size_t o = overlap(pred[i], gold[j]);
      if (o > best_overlap) {
        best_overlap = o;
        best = j;
      }
    }
    if (best == gold.size()) continue;  // no positive overlap left
    taken[best] = true;
    ++matched;
    double denom = static_cast<double>(std::max(pred_width[i], gold_width[best]));
    tp += static_cast<double>(best_overlap) / denom;
    fp += static_cast<double>(pred_width[i] - best_overlap) / denom;
    fn += static_cast<double>(gold_width[best] - best_overlap) / denom;
  }

  fp += static_cast<double>(pred.size() - matched);
  fn += static_cast<double>(gold.size() - matched);
  double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

EvalRecord score_prediction(const Task& task, const std::optional<std::string>& pred_sql,
                            const std::string& db_path, const ExecLimits& limits) {
  EvalRecord record;
  record.question_id = task.question_id;
  record.tier = task.difficulty_tier;

  if (!task.gold_sql) {
    record.gold_ok = false;
    record.note = "no gold query";
    return record;
  }
  ExecutionResult gold = execute(*task.gold_sql, db_path, limits);
  if (!gold.ok()) {
    record.gold_ok = false;
    record.note = "gold query failed: " + gold.error->message;
    return record;
  }

  if (!pred_sql) {
    record.parsed = false;
    record.note = "no prediction";
    return record;
  }
  ExecutionResult pred = execute(*pred_sql, db_path, limits);
  if (!pred.ok()) {
    record.note = "prediction failed: " + pred.error->message;
    return record;
  }

  bool order_sensitive = has_toplevel_order_by(*task.gold_sql);
  record.ex = output_key(pred, order_sensitive) == output_key(gold, order_sensitive);
  record.soft_f1 = record.ex ? 1.0 : soft_f1(pred.rows, gold.rows);
  return record;
}

EvalSummary aggregate_report(const std::vector<EvalRecord>& records) {
  EvalSummary summary;
  std::array<double, 3> tier_ex{}, tier_f1{};
  double all_ex = 0.0, all_f1 = 0.0;
  size_t all_count = 0;

  for (const auto& record : records) {
    if (!record.gold_ok) {
      ++summary.invalid_gold;
      continue;
    }
    ++all_count;
    all_ex += record.ex ? 1.0 : 0.0;
    all_f1 += record.soft_f1;
    if (record.tier) {
      size_t t = static_cast<size_t>(*record.tier);
      ++summary.tiers[t].count;
      tier_ex[t] += record.ex ? 1.0 : 0.0;
      tier_f1[t] += record.soft_f1;
    }
  }

  for (size_t t = 0; t < 3; ++t) {
    if (summary.tiers[t].count == 0) continue;
    summary.tiers[t].ex_pct = 100.0 * tier_ex[t] / static_cast<double>(summary.tiers[t].count);
    summary.tiers[t].soft_f1_pct = 100.0 * tier_f1[t] / static_cast<double>(summary.tiers[t].count);
  }
  summary.overall.count = all_count;
  if (all_count > 0) {
    summary.overall.ex_pct = 100.0 * all_ex / static_cast<double>(all_count);
    summary.overall.soft_f1_pct = 100.0 * all_f1 / static_cast<double>(all_count);
  }
  return summary;
}

std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", pct);
  return buf;
}

namespace {

const char* kTierLabels[] = {"simple", "moderate", "challenging"};

}

std::string render_summary_text(const EvalSummary& summary) {
  std::ostringstream out;
  out << "tier          count   EX%      SoftF1%\n";
  for (size_t t = 0; t < 3; ++t) {
    char line[96];
    std::snprintf(line, sizeof(line), "%-12s  %5zu   %-7s  %s\n", kTierLabels[t],
                  summary.tiers[t].count, format_pct(summary.tiers[t].ex_pct).c_str(),
                  format_pct(summary.tiers[t].soft_f1_pct).c_str());
    out << line;
  }
  char line[96];
  std::snprintf(line, sizeof(line), "%-12s  %5zu   %-7s  %s\n", "overall", summary.overall.count,
                format_pct(summary.overall.ex_pct).c_str(),
                format_pct(summary.overall.soft_f1_pct).c_str());
  out << line;
  if (summary.invalid_gold > 0)
    out << "invalid gold records excluded: " << summary.invalid_gold << "\n";
  return out.str();
}

std::string render_summary_kv(const EvalSummary& summary) {
  std::ostringstream out;
  for (size_t t = 0; t < 3; ++t) {
    out << "ex_" << kTierLabels[t] << "=" << format_pct(summary.tiers[t].ex_pct) << "\n";
    out << "soft_f1_" << kTierLabels[t] << "=" << format_pct(summary.tiers[t].soft_f1_pct) << "\n";
    out << "count_" << kTierLabels[t] << "=" << summary.tiers[t].count << "\n";
  }
  out << "ex_overall=" << format_pct(summary.overall.ex_pct) << "\n";
  out << "soft_f1_overall=" << format_pct(summary.overall.soft_f1_pct) << "\n";
  out << "count_overall=" << summary.overall.count << "\n";
  out << "invalid_gold=" << summary.invalid_gold << "\n";
  return out.str();
}

}  // namespace evosql
