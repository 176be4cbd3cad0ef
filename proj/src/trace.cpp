#include "evosql/trace.hpp"

#include "evosql/errors.hpp"
#include "evosql/util.hpp"
#include "json.hpp"

namespace evosql {

namespace {

nlohmann::json task_to_json(const Task& task) {
  nlohmann::json doc{{"question_id", task.question_id},
                     {"db_id", task.db_id},
                     {"question", task.question},
                     {"hint", task.hint}};
  doc["gold_sql"] = task.gold_sql ? nlohmann::json(*task.gold_sql) : nlohmann::json();
  doc["tier"] =
      task.difficulty_tier ? nlohmann::json(tier_name(*task.difficulty_tier)) : nlohmann::json();
  return doc;
}

Task task_from_json(const nlohmann::json& doc) {
  Task task;
  task.question_id = doc.value("question_id", int64_t{-1});
  task.db_id = doc.value("db_id", "");
  task.question = doc.value("question", "");
  task.hint = doc.value("hint", "");
  if (doc.contains("gold_sql") && doc["gold_sql"].is_string())
    task.gold_sql = doc["gold_sql"].get<std::string>();
  if (doc.contains("tier") && doc["tier"].is_string())
    task.difficulty_tier = parse_tier(doc["tier"].get<std::string>());
  return task;
}

SolutionReport report_from_json(const nlohmann::json& doc) {
  SolutionReport report;
  if (doc.contains("chosen_sql") && doc["chosen_sql"].is_string())
    report.chosen_sql = doc["chosen_sql"].get<std::string>();
  report.failure_reason = doc.value("failure_reason", "");
  report.difficulty = doc.value("difficulty", 0);
  report.iterations = doc.value("iterations", 0);

  if (doc.contains("buffer") && doc["buffer"].is_array()) {
    for (const auto& item : doc["buffer"]) {
      BufferEntry entry;
      entry.sql = item.value("sql", "");
      entry.reward = item.value("reward", 0.0);
      entry.output.value = item.value("output", "");
      entry.critique.score = item.value("score", 0.0);
      entry.critique.confidence = item.value("confidence", 0.0);
      entry.critique.temperature = item.value("temperature", 0.0);
      if (item.contains("preview") && item["preview"].is_array())
        entry.preview_rows = item["preview"].get<std::vector<std::string>>();
      entry.chain_id = item.value("chain_id", -1);
      entry.depth = item.value("depth", 0);
      entry.iteration = item.value("iteration", 0);
      report.buffer.push_back(std::move(entry));
    }
  }
  if (doc.contains("pools") && doc["pools"].is_array())
    report.pool_fingerprints = doc["pools"].get<std::vector<std::vector<std::string>>>();
  if (doc.contains("call_counts") && doc["call_counts"].is_array()) {
    auto counts = doc["call_counts"].get<std::vector<uint64_t>>();
    for (size_t i = 0; i < kRoleCount && i < counts.size(); ++i) report.call_counts[i] = counts[i];
  }
  if (doc.contains("tally") && doc["tally"].is_object()) {
    VoteTally tally;
    if (auto strategy = parse_strategy(doc["tally"].value("strategy", "")))
      tally.strategy = *strategy;
    tally.winner.value = doc["tally"].value("winner", "");
    if (doc["tally"].contains("keys")) {
      for (const auto& item : doc["tally"]["keys"]) {
        KeyAggregate agg;
        agg.sum = item.value("sum", 0.0);
        agg.max = item.value("max", 0.0);
        agg.mean = item.value("mean", 0.0);
        agg.count = item.value("count", size_t{0});
        agg.representative_sql = item.value("sql", "");
        tally.per_key[OutputKey{item.value("key", "")}] = std::move(agg);
      }
    }
    report.tally = std::move(tally);
  }
  if (doc.contains("events") && doc["events"].is_array()) {
    for (const auto& item : doc["events"]) {
      LlmEvent event;
      auto role = parse_role(item.value("role", ""));
      if (!role) continue;
      event.role = *role;
      event.prompt = item.value("prompt", "");
      event.response = item.value("response", "");
      event.seed = item.value("seed", uint64_t{0});
      event.temperature = item.value("temperature", 0.0);
      report.events.push_back(std::move(event));
    }
  }
  if (doc.contains("notes") && doc["notes"].is_array())
    report.notes = doc["notes"].get<std::vector<std::string>>();
  return report;
}

}  // namespace

void write_trace(const std::string& path, const TraceRecord& record, bool redact) {
  nlohmann::json doc;
  doc["task"] = task_to_json(record.task);
  nlohmann::json report = nlohmann::json::parse(report_canonical_json(record.report));
  if (redact) report.erase("events");
  doc["report"] = std::move(report);
  doc["wall_ms"] = record.report.wall_ms;
  write_text_file(path, doc.dump(2) + "\n");
}

TraceRecord read_trace(const std::string& path) {
  auto doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (!doc.is_object() || !doc.contains("task") || !doc.contains("report"))
    throw Error(ErrorKind::IoError, "not a trace file: " + path);
  TraceRecord record;
  record.task = task_from_json(doc["task"]);
  record.report = report_from_json(doc["report"]);
  record.report.wall_ms = doc.value("wall_ms", int64_t{0});
  return record;
}

std::vector<ScriptedBackend::Record> scripted_records_from_traces(
    const std::vector<std::string>& paths) {
  std::vector<ScriptedBackend::Record> records;
  for (const auto& path : paths) {
    TraceRecord trace = read_trace(path);
    if (trace.report.events.empty())
      throw Error(ErrorKind::TraceWithoutBuffer, "trace has no replayable events: " + path);
    for (const auto& event : trace.report.events) {
      ScriptedBackend::Record record;
      record.role = event.role;
      record.match = event.prompt;  // exact prompt; containment implies equality here
      record.seed = event.seed;
      record.response = event.response;
      records.push_back(std::move(record));
    }
  }
  return records;
}

void write_scenario(const std::string& path,
                    const std::vector<ScriptedBackend::Record>& records) {
  nlohmann::json doc;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& record : records) {
    nlohmann::json item{{"role", role_name(record.role)},
                        {"match", record.match},
                        {"response", record.response},
                        {"sticky", record.sticky}};
    if (record.seed) item["seed"] = *record.seed;
    list.push_back(std::move(item));
  }
  doc["records"] = std::move(list);
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace evosql
