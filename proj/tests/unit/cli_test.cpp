#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "evosql/cli.hpp"
#include "evosql/errors.hpp"
#include "evosql/eval.hpp"
#include "evosql/executor.hpp"
#include "evosql/sqltext.hpp"
#include "evosql/trace.hpp"
#include "evosql/util.hpp"

#include "../helpers.hpp"

using namespace evosql;
using namespace evosql::testing;
using nlohmann::json;

namespace {

RunConfig small_run_config(const std::string& root, uint64_t seed = 5) {
  RunConfig config;
  config.dataset_root = root;
  config.backend = BackendKind::Synthetic;
  config.pool_samples = 4;  // keeps the fixture runs fast
  config.concurrency = 2;
  config.seed = seed;
  return config;
}

std::vector<std::string> trace_paths(const std::string& trace_dir,
                                     const std::vector<int64_t>& ids) {
  std::vector<std::string> paths;
  for (int64_t id : ids) {
    paths.push_back(trace_dir + "/task_" + std::to_string(id) + ".json");
  }
  return paths;
}

const std::vector<int64_t> kAllIds = {10, 11, 12, 13, 14, 15};

template <typename Fn>
std::string expect_kind(ErrorKind kind, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
    return e.what();
  }
  FAIL_CHECK("expected an error of kind " << error_kind_name(kind));
  return "";
}

}  // namespace

TEST_CASE("exit codes group errors by recovery class") {
  CHECK(exit_code_for(ErrorKind::MissingDataset) == 2);
  CHECK(exit_code_for(ErrorKind::UnreadableDatabase) == 2);
  CHECK(exit_code_for(ErrorKind::UnknownQuestionId) == 2);
  CHECK(exit_code_for(ErrorKind::BackendFailure) == 3);
  CHECK(exit_code_for(ErrorKind::BackendExhausted) == 3);
  CHECK(exit_code_for(ErrorKind::ConfigError) == 1);
  CHECK(exit_code_for(ErrorKind::DomainError) == 1);
  CHECK(exit_code_for(ErrorKind::NoCandidates) == 1);
}

TEST_CASE("backend kinds parse and render round-trip") {
  for (auto kind : {BackendKind::Synthetic, BackendKind::Scripted, BackendKind::Live}) {
    auto parsed = parse_backend_kind(backend_kind_name(kind));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == kind);
  }
  CHECK(!parse_backend_kind("quantum").has_value());
}

TEST_CASE("make_backend enforces credential and scenario requirements") {
  TempDir dir("cli_mk");
  RunConfig config;

  SUBCASE("live backend requires the named environment variable") {
    config.backend = BackendKind::Live;
    config.api_key_env = "EVOSQL_TEST_KEY_SURELY_UNSET";
    unsetenv(config.api_key_env.c_str());
    std::string message =
        expect_kind(ErrorKind::ConfigError, [&] { make_backend(config); });
    CHECK(message.find("EVOSQL_TEST_KEY_SURELY_UNSET") != std::string::npos);
  }
  SUBCASE("empty api_key_env opts out of auth for local endpoints") {
    config.backend = BackendKind::Live;
    config.api_key_env = "";
    auto backend = make_backend(config);
    CHECK(backend->name() == std::string("http"));
  }
  SUBCASE("scripted backend requires a scenario path") {
    config.backend = BackendKind::Scripted;
    config.scenario_path = "";
    expect_kind(ErrorKind::ConfigError, [&] { validate_config(config); });
  }
  SUBCASE("scripted backend loads a scenario file") {
    config.backend = BackendKind::Scripted;
    config.scenario_path = dir.file("scenario.json");
    write_text_file(
        config.scenario_path,
        R"({"records": [{"role": "difficulty", "response": "3", "sticky": true}]})");
    auto backend = make_backend(config);
    CHECK(backend->name() == std::string("scripted"));
  }
  SUBCASE("synthetic backend needs nothing") {
    config.backend = BackendKind::Synthetic;
    CHECK(make_backend(config)->name() == std::string("synthetic"));
  }
}

TEST_CASE("cmd_run writes deterministic predictions and replayable traces") {
  TempDir dir("cli_run");
  std::string root = make_bird_root(dir);
  RunConfig config = small_run_config(root);

  RunArgs args;
  args.predictions_path = dir.file("pred_a.jsonl");
  args.trace_dir = dir.file("traces_a");
  args.quiet = true;
  cmd_run(config, args);

  std::string first = read_text_file(args.predictions_path);
  auto lines = split_lines(first);
  REQUIRE(lines.size() == 6);
  std::set<int64_t> seen;
  for (const auto& line : lines) {
    json doc = json::parse(line);
    seen.insert(doc.at("question_id").get<int64_t>());
    CHECK((doc.contains("sql") || doc.contains("failed")));
  }
  CHECK(seen == std::set<int64_t>(kAllIds.begin(), kAllIds.end()));

  // same config, fresh output file: byte-identical predictions
  RunArgs again;
  again.predictions_path = dir.file("pred_b.jsonl");
  again.quiet = true;
  cmd_run(config, again);
  CHECK(read_text_file(again.predictions_path) == first);

  // every task has a trace that parses back with its identity intact
  for (int64_t id : kAllIds) {
    TraceRecord trace = read_trace(args.trace_dir + "/task_" + std::to_string(id) + ".json");
    CHECK(trace.task.question_id == id);
    CHECK(trace.task.db_id == "shop");
    CHECK(trace.task.gold_sql.has_value());
    CHECK(!trace.report.events.empty());
    CHECK((trace.report.chosen_sql.has_value() || !trace.report.failure_reason.empty()));
  }
}

TEST_CASE("cmd_run honors the only_ids filter") {
  TempDir dir("cli_only");
  std::string root = make_bird_root(dir);
  RunConfig config = small_run_config(root);

  RunArgs args;
  args.predictions_path = dir.file("pred.jsonl");
  args.only_ids = {12, 10};
  args.quiet = true;
  cmd_run(config, args);

  auto lines = split_lines(read_text_file(args.predictions_path));
  REQUIRE(lines.size() == 2);
  // dataset order, not filter order
  CHECK(json::parse(lines[0]).at("question_id") == 10);
  CHECK(json::parse(lines[1]).at("question_id") == 12);
}

TEST_CASE("cmd_run records per-task failures instead of aborting") {
  TempDir dir("cli_fail");
  std::string root = make_bird_root(dir);
  // clobber the database so schema loading fails for every task
  write_text_file(root + "/dev_databases/shop/shop.sqlite", "not a database");

  RunConfig config = small_run_config(root);
  RunArgs args;
  args.predictions_path = dir.file("pred.jsonl");
  args.quiet = true;
  cmd_run(config, args);

  auto lines = split_lines(read_text_file(args.predictions_path));
  REQUIRE(lines.size() == 6);
  for (const auto& line : lines) {
    json doc = json::parse(line);
    CHECK(!doc.contains("sql"));
    CHECK(!doc.at("failed").get<std::string>().empty());
  }
}

TEST_CASE("trace files round-trip reports exactly and redaction drops events") {
  TempDir dir("cli_trace");
  std::string root = make_bird_root(dir);
  auto dev = load_bird_dev(root);
  Gateway gateway = make_synthetic_gateway();

  SearchOptions options;
  options.pool_samples = 4;
  std::string db = bird_db_path(root, "shop");
  TraceRecord record;
  record.task = dev.tasks[0];
  record.report = run_task(record.task, load_schema(db), db, options, gateway, 5);

  std::string path = dir.file("full.json");
  write_trace(path, record, false);
  TraceRecord back = read_trace(path);
  CHECK(back.task.question_id == record.task.question_id);
  CHECK(back.task.hint == record.task.hint);
  CHECK(back.task.gold_sql == record.task.gold_sql);
  CHECK(back.task.difficulty_tier == record.task.difficulty_tier);
  CHECK(report_canonical_json(back.report) == report_canonical_json(record.report));

  std::string redacted_path = dir.file("redacted.json");
  write_trace(redacted_path, record, true);
  TraceRecord redacted = read_trace(redacted_path);
  CHECK(redacted.report.events.empty());
  CHECK(redacted.report.buffer.size() == record.report.buffer.size());
  CHECK(redacted.report.chosen_sql == record.report.chosen_sql);
}

TEST_CASE("cmd_eval scores predictions against the dataset") {
  TempDir dir("cli_eval");
  std::string root = make_bird_root(dir);
  auto dev = load_bird_dev(root);
  RunConfig config = small_run_config(root);

  SUBCASE("gold predictions score a perfect run") {
    std::string body;
    for (const auto& task : dev.tasks) {
      json doc = {{"question_id", task.question_id}, {"sql", *task.gold_sql}};
      body += doc.dump() + "\n";
    }
    EvalArgs args;
    args.predictions_path = dir.file("pred.jsonl");
    args.report_path = dir.file("report.txt");
    args.csv_path = dir.file("records.csv");
    args.quiet = true;
    write_text_file(args.predictions_path, body);

    EvalSummary summary = cmd_eval(config, args);
    CHECK(summary.overall.count == 6);
    CHECK(format_pct(summary.overall.ex_pct) == "100.00");
    CHECK(format_pct(summary.overall.soft_f1_pct) == "100.00");

    std::string report = read_text_file(args.report_path);
    CHECK(report.find("ex_overall=100.00\n") != std::string::npos);
    CHECK(report.find("soft_f1_overall=100.00\n") != std::string::npos);

    auto csv = split_lines(read_text_file(args.csv_path));
    REQUIRE(csv.size() == 7);
    CHECK(csv[0] == "question_id,tier,ex,soft_f1,note");
    CHECK(csv[1].rfind("10,simple,1,100.00", 0) == 0);
  }

  SUBCASE("failures and wrong answers land in their tiers") {
    std::string body;
    for (const auto& task : dev.tasks) {
      json doc;
      if (task.question_id <= 12) {
        doc = {{"question_id", task.question_id}, {"sql", *task.gold_sql}};
      } else if (task.question_id == 15) {
        doc = {{"question_id", task.question_id}, {"failed", "no_candidates"}};
      } else {
        doc = {{"question_id", task.question_id}, {"sql", "SELECT 999"}};
      }
      body += doc.dump() + "\n";
    }
    EvalArgs args;
    args.predictions_path = dir.file("pred.jsonl");
    args.quiet = true;
    write_text_file(args.predictions_path, body);

    EvalSummary summary = cmd_eval(config, args);
    CHECK(format_pct(summary.tiers[0].ex_pct) == "100.00");
    CHECK(format_pct(summary.tiers[1].ex_pct) == "50.00");
    CHECK(format_pct(summary.tiers[2].ex_pct) == "0.00");
    CHECK(format_pct(summary.overall.ex_pct) == "50.00");
  }

  SUBCASE("unknown question ids are an error") {
    EvalArgs args;
    args.predictions_path = dir.file("pred.jsonl");
    args.quiet = true;
    write_text_file(args.predictions_path, R"({"question_id": 999, "sql": "SELECT 1"})"
                                           "\n");
    expect_kind(ErrorKind::UnknownQuestionId, [&] { cmd_eval(config, args); });
  }

  SUBCASE("malformed prediction lines are an io error") {
    EvalArgs args;
    args.predictions_path = dir.file("pred.jsonl");
    args.quiet = true;
    write_text_file(args.predictions_path, "not json\n");
    expect_kind(ErrorKind::IoError, [&] { cmd_eval(config, args); });
  }
}

TEST_CASE("cmd_ablate revotes stored traces under four strategies") {
  TempDir dir("cli_ablate");
  std::string root = make_bird_root(dir);
  RunConfig config = small_run_config(root);

  RunArgs run;
  run.predictions_path = dir.file("pred.jsonl");
  run.trace_dir = dir.file("traces");
  run.quiet = true;
  cmd_run(config, run);

  AblateArgs args;
  args.trace_paths = trace_paths(run.trace_dir, kAllIds);
  args.csv_path = dir.file("ablate.csv");
  args.quiet = true;
  AblateResult result = cmd_ablate(config, args);

  for (const auto& summary : result.summaries) {
    CHECK(summary.overall.count == 6);
    CHECK(summary.invalid_gold == 0);
  }
  for (const char* name :
       {"sum_of_rewards", "majority", "highest_reward", "highest_avg_reward"}) {
    CHECK(result.table_text.find(name) != std::string::npos);
  }
  auto csv = split_lines(read_text_file(args.csv_path));
  REQUIRE(csv.size() == 17);  // header + 4 strategies x 4 tier rows
  CHECK(csv[0] == "strategy,tier,ex_pct,soft_f1_pct,count");
}

TEST_CASE("cmd_ablate agrees across strategies on hand-built traces") {
  TempDir dir("cli_ablate_hand");
  std::string root = make_bird_root(dir);
  std::string db = bird_db_path(root, "shop");
  auto dev = load_bird_dev(root);
  RunConfig config = small_run_config(root);

  auto entry = [&](const std::string& sql, double reward) {
    BufferEntry e;
    e.sql = sql;
    e.reward = reward;
    e.output = output_key(execute(sql, db), has_toplevel_order_by(sql));
    return e;
  };
  auto trace_for = [&](int64_t qid) {
    TraceRecord record;
    for (const auto& task : dev.tasks) {
      if (task.question_id == qid) record.task = task;
    }
    return record;
  };

  // one entry: every strategy must pick it
  TraceRecord solo = trace_for(10);
  solo.report.buffer = {entry(*solo.task.gold_sql, 0.5)};

  // equal positive rewards: sum-of-rewards degenerates to majority, and the
  // 2-vs-1 split also decides highest/avg via the lexically smaller key
  TraceRecord split = trace_for(11);
  split.report.buffer = {entry(*split.task.gold_sql, 0.25),
                         entry(*split.task.gold_sql, 0.25), entry("SELECT 999", 0.25)};

  // recorded failure: allowed, scored as unparsed
  TraceRecord failed = trace_for(12);
  failed.report.failure_reason = "no_candidates";

  write_trace(dir.file("solo.json"), solo, false);
  write_trace(dir.file("split.json"), split, false);
  write_trace(dir.file("failed.json"), failed, false);

  AblateArgs args;
  args.trace_paths = {dir.file("solo.json"), dir.file("split.json"), dir.file("failed.json")};
  args.quiet = true;
  AblateResult result = cmd_ablate(config, args);
  for (const auto& summary : result.summaries) {
    CHECK(summary.overall.count == 3);
    CHECK(format_pct(summary.overall.ex_pct) == "66.67");
  }
  // equal-rewards equivalence holds tier by tier
  for (size_t tier = 0; tier < 3; ++tier) {
    CHECK(result.summaries[0].tiers[tier].ex_pct ==
          result.summaries[1].tiers[tier].ex_pct);
    CHECK(result.summaries[0].tiers[tier].soft_f1_pct ==
          result.summaries[1].tiers[tier].soft_f1_pct);
  }

  SUBCASE("an empty buffer without a failure reason is rejected") {
    TraceRecord bad = trace_for(13);
    write_trace(dir.file("bad.json"), bad, false);
    AblateArgs broken;
    broken.trace_paths = {dir.file("bad.json")};
    broken.quiet = true;
    expect_kind(ErrorKind::TraceWithoutBuffer, [&] { cmd_ablate(config, broken); });
  }
}

TEST_CASE("cmd_diversity renders a deterministic grid") {
  TempDir dir("cli_div");

  SUBCASE("synthetic tasks when no dataset root is set") {
    RunConfig config;
    config.backend = BackendKind::Synthetic;
    config.seed = 3;

    DiversityArgs args;
    args.task_count = 3;
    args.n = 4;
    args.temperatures = {0.0, 0.5};
    args.csv_path = dir.file("div_a.csv");
    args.quiet = true;
    DiversityOutcome out = cmd_diversity(config, args);
    REQUIRE(out.cells.size() == 6);  // 2 temperatures x 3 regimes

    std::string first = read_text_file(args.csv_path);
    CHECK(split_lines(first).size() == 7);
    CHECK(first.rfind("temperature,regime,", 0) == 0);

    args.csv_path = dir.file("div_b.csv");
    cmd_diversity(config, args);
    CHECK(read_text_file(args.csv_path) == first);
  }

  SUBCASE("dataset root draws tasks from the dev split") {
    std::string root = make_bird_root(dir);
    RunConfig config = small_run_config(root);
    DiversityArgs args;
    args.task_count = 2;
    args.n = 3;
    args.temperatures = {0.0};
    args.quiet = true;
    DiversityOutcome out = cmd_diversity(config, args);
    REQUIRE(out.cells.size() == 3);
    for (const auto& cell : out.cells) CHECK(cell.task_count == 2);
  }

  SUBCASE("argument validation") {
    RunConfig config;
    DiversityArgs args;
    args.quiet = true;
    args.n = 1;
    expect_kind(ErrorKind::ConfigError, [&] { cmd_diversity(config, args); });
    args.n = 4;
    args.task_count = 0;
    expect_kind(ErrorKind::ConfigError, [&] { cmd_diversity(config, args); });
  }
}

TEST_CASE("traces replay through a scripted backend byte for byte") {
  TempDir dir("cli_replay");
  std::string root = make_bird_root(dir);
  RunConfig config = small_run_config(root, 7);

  RunArgs run;
  run.predictions_path = dir.file("pred_live.jsonl");
  run.trace_dir = dir.file("traces");
  run.quiet = true;
  cmd_run(config, run);
  std::string live_bytes = read_text_file(run.predictions_path);

  auto records = scripted_records_from_traces(trace_paths(run.trace_dir, kAllIds));
  std::string scenario = dir.file("scenario.json");
  write_scenario(scenario, records);

  RunConfig replay = config;
  replay.backend = BackendKind::Scripted;
  replay.scenario_path = scenario;
  RunArgs rerun;
  rerun.predictions_path = dir.file("pred_replay.jsonl");
  rerun.quiet = true;
  cmd_run(replay, rerun);
  CHECK(read_text_file(rerun.predictions_path) == live_bytes);
}

TEST_CASE("redacted traces support ablation but refuse replay") {
  TempDir dir("cli_redact");
  std::string root = make_bird_root(dir);
  RunConfig config = small_run_config(root);
  config.redact_traces = true;

  RunArgs run;
  run.predictions_path = dir.file("pred.jsonl");
  run.trace_dir = dir.file("traces");
  run.quiet = true;
  cmd_run(config, run);

  auto paths = trace_paths(run.trace_dir, kAllIds);
  expect_kind(ErrorKind::TraceWithoutBuffer, [&] { scripted_records_from_traces(paths); });

  AblateArgs args;
  args.trace_paths = paths;
  args.quiet = true;
  AblateResult result = cmd_ablate(config, args);
  CHECK(result.summaries[0].overall.count == 6);
}
