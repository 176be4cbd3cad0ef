#include "evosql/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "evosql/errors.hpp"
#include "evosql/trace.hpp"
#include "evosql/util.hpp"
#include "json.hpp"

namespace evosql {

namespace {

const FullSchema& cached_schema(std::map<std::string, FullSchema>& cache, const std::string& root,
                                const std::string& db_id) {
  auto it = cache.find(db_id);
  if (it != cache.end()) return it->second;
  return cache.emplace(db_id, load_schema(bird_db_path(root, db_id))).first->second;
}

}  // namespace

void cmd_run(const RunConfig& config, const RunArgs& args) {
  validate_config(config);
  BirdDev dev = load_bird_dev(config.dataset_root);

  std::vector<Task> tasks;
  if (args.only_ids.empty()) {
    tasks = dev.tasks;
  } else {
    std::set<int64_t> wanted(args.only_ids.begin(), args.only_ids.end());
    for (const auto& task : dev.tasks)
      if (wanted.count(task.question_id)) tasks.push_back(task);
  }

  auto backend = make_backend(config);
  PromptLibrary prompts = prompt_library(config);
  auto configs = role_configs(config);
  GatewayOptions gw_options = gateway_options(config);
  SearchOptions options = search_options(config);

  if (!args.trace_dir.empty()) std::filesystem::create_directories(args.trace_dir);

  std::map<std::string, FullSchema> schemas;
  std::ostringstream lines;
  size_t failed = 0;
  for (const auto& task : tasks) {
    nlohmann::json line;
    line["question_id"] = task.question_id;
    try {
      const FullSchema& schema = cached_schema(schemas, config.dataset_root, task.db_id);
      Gateway gateway(backend, prompts, configs, gw_options);
      SolutionReport report =
          run_task(task, schema, bird_db_path(config.dataset_root, task.db_id), options, gateway,
                   mix_seed(config.seed, "task", {static_cast<uint64_t>(task.question_id)}));
      if (report.chosen_sql) {
        line["sql"] = *report.chosen_sql;
      } else {
        line["failed"] = report.failure_reason;
        ++failed;
      }
      if (!args.trace_dir.empty()) {
        std::filesystem::path path = std::filesystem::path(args.trace_dir) /
                                     ("task_" + std::to_string(task.question_id) + ".json");
        write_trace(path.string(), TraceRecord{task, std::move(report)}, config.redact_traces);
      }
    } catch (const Error& e) {
      line["failed"] = e.what();
      ++failed;
    }
    lines << line.dump() << "\n";
  }

  write_text_file(args.predictions_path, lines.str());
  if (!args.quiet)
    std::printf("ran %zu task(s), %zu failed; predictions: %s\n", tasks.size(), failed,
                args.predictions_path.c_str());
}

EvalSummary cmd_eval(const RunConfig& config, const EvalArgs& args) {
  validate_config(config);
  BirdDev dev = load_bird_dev(config.dataset_root);
  std::map<int64_t, const Task*> by_id;
  for (const auto& task : dev.tasks) by_id[task.question_id] = &task;

  struct Prediction {
    int64_t question_id;
    std::optional<std::string> sql;
  };
  std::vector<Prediction> predictions;
  for (const auto& raw : split_lines(read_text_file(args.predictions_path))) {
    if (trim(raw).empty()) continue;
    auto doc = nlohmann::json::parse(raw, nullptr, false);
    if (!doc.is_object() || !doc.contains("question_id") || !doc["question_id"].is_number())
      throw Error(ErrorKind::IoError, "bad prediction line: " + raw);
    Prediction p;
    p.question_id = doc["question_id"].get<int64_t>();
    if (doc.contains("sql") && doc["sql"].is_string()) p.sql = doc["sql"].get<std::string>();
    if (!by_id.count(p.question_id))
      throw Error(ErrorKind::UnknownQuestionId,
                  "question_id " + std::to_string(p.question_id) + " is not in the dataset");
    predictions.push_back(std::move(p));
  }

  ExecLimits limits = exec_limits(config);
  std::vector<EvalRecord> records;
  for (const auto& p : predictions) {
    const Task& task = *by_id[p.question_id];
    records.push_back(
        score_prediction(task, p.sql, bird_db_path(config.dataset_root, task.db_id), limits));
  }

  EvalSummary summary = aggregate_report(records);
  if (!args.quiet) std::fputs(render_summary_text(summary).c_str(), stdout);
  if (!args.report_path.empty()) write_text_file(args.report_path, render_summary_kv(summary));
  if (!args.csv_path.empty()) {
    std::ostringstream csv;
    csv << "question_id,tier,ex,soft_f1,note\n";
    for (const auto& r : records) {
      std::string note = r.note;
      std::replace(note.begin(), note.end(), ',', ';');
      std::replace(note.begin(), note.end(), '\n', ' ');
      csv << r.question_id << "," << (r.tier ? tier_name(*r.tier) : "") << "," << (r.ex ? 1 : 0)
          << "," << format_pct(100.0 * r.soft_f1) << "," << note << "\n";
    }
    write_text_file(args.csv_path, csv.str());
  }
  return summary;
}

AblateResult cmd_ablate(const RunConfig& config, const AblateArgs& args) {
  validate_config(config);
  static const Strategy kStrategies[] = {Strategy::SumOfRewards, Strategy::Majority,
                                         Strategy::HighestReward, Strategy::HighestAvgReward};

  std::vector<TraceRecord> traces;
  for (const auto& path : args.trace_paths) {
    TraceRecord trace = read_trace(path);
    if (trace.report.buffer.empty() && trace.report.failure_reason.empty())
      throw Error(ErrorKind::TraceWithoutBuffer, "no buffer in trace: " + path);
    traces.push_back(std::move(trace));
  }

  ExecLimits limits = exec_limits(config);
  AblateResult result;
  for (size_t si = 0; si < 4; ++si) {
    std::vector<EvalRecord> records;
    for (const auto& trace : traces) {
      std::optional<std::string> chosen;
      if (!trace.report.buffer.empty())
        chosen = select_query(trace.report.buffer, kStrategies[si]).sql;
      records.push_back(score_prediction(
          trace.task, chosen, bird_db_path(config.dataset_root, trace.task.db_id), limits));
    }
    result.summaries[si] = aggregate_report(records);
  }

  static const char* kTierLabels[] = {"simple", "moderate", "challenging"};
  std::ostringstream table;
  table << "EX% by voting strategy\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s", "tier");
  table << line;
  for (auto strategy : kStrategies) {
    std::snprintf(line, sizeof(line), "  %-18s", strategy_name(strategy));
    table << line;
  }
  table << "\n";
  for (size_t t = 0; t < 3; ++t) {
    std::snprintf(line, sizeof(line), "%-12s", kTierLabels[t]);
    table << line;
    for (size_t si = 0; si < 4; ++si) {
      std::snprintf(line, sizeof(line), "  %-18s",
                    format_pct(result.summaries[si].tiers[t].ex_pct).c_str());
      table << line;
    }
    table << "\n";
  }
  std::snprintf(line, sizeof(line), "%-12s", "overall");
  table << line;
  for (size_t si = 0; si < 4; ++si) {
    std::snprintf(line, sizeof(line), "  %-18s",
                  format_pct(result.summaries[si].overall.ex_pct).c_str());
    table << line;
  }
  table << "\n";
  result.table_text = table.str();
  if (!args.quiet) std::fputs(result.table_text.c_str(), stdout);

  if (!args.csv_path.empty()) {
    std::ostringstream csv;
    csv << "strategy,tier,ex_pct,soft_f1_pct,count\n";
    for (size_t si = 0; si < 4; ++si) {
      for (size_t t = 0; t < 3; ++t) {
        csv << strategy_name(kStrategies[si]) << "," << kTierLabels[t] << ","
            << format_pct(result.summaries[si].tiers[t].ex_pct) << ","
            << format_pct(result.summaries[si].tiers[t].soft_f1_pct) << ","
            << result.summaries[si].tiers[t].count << "\n";
      }
      csv << strategy_name(kStrategies[si]) << ",overall,"
          << format_pct(result.summaries[si].overall.ex_pct) << ","
          << format_pct(result.summaries[si].overall.soft_f1_pct) << ","
          << result.summaries[si].overall.count << "\n";
    }
    write_text_file(args.csv_path, csv.str());
  }
  return result;
}

DiversityOutcome cmd_diversity(const RunConfig& config, const DiversityArgs& args) {
  validate_config(config);
  if (args.n < 2) throw Error(ErrorKind::ConfigError, "diversity N must be >= 2");
  if (args.task_count < 1) throw Error(ErrorKind::ConfigError, "task_count must be >= 1");

  auto backend = make_backend(config);

  std::vector<DiversityTask> tasks;
  if (config.backend == BackendKind::Synthetic && config.dataset_root.empty()) {
    tasks = synthetic_diversity_tasks(args.task_count, mix_seed(config.seed, "div_tasks"));
  } else {
    BirdDev dev = load_bird_dev(config.dataset_root);
    // fixed-seed sample, the same for every temperature
    std::vector<size_t> order(dev.tasks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(mix_seed(config.seed, "div_sample"));
    rng.shuffle(order);
    std::map<std::string, FullSchema> schemas;
    for (size_t idx : order) {
      if (tasks.size() >= static_cast<size_t>(args.task_count)) break;
      const Task& task = dev.tasks[idx];
      tasks.push_back(
          DiversityTask{task, cached_schema(schemas, config.dataset_root, task.db_id)});
    }
  }

  PromptLibrary prompts = prompt_library(config);
  Gateway gateway(backend, prompts, role_configs(config), gateway_options(config));

  DiversityOptions options;
  options.n = args.n;
  options.temperatures = args.temperatures;
  options.concurrency = config.concurrency;
  DiversityOutcome outcome =
      run_comparison(tasks, gateway, options, mix_seed(config.seed, "diversity"));

  if (!args.quiet) std::fputs(render_diversity_text(outcome).c_str(), stdout);
  if (!args.csv_path.empty()) write_text_file(args.csv_path, render_diversity_csv(outcome));
  return outcome;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingDataset:
    case ErrorKind::UnreadableDatabase:
    case ErrorKind::UnknownQuestionId:
      return 2;
    case ErrorKind::BackendFailure:
    case ErrorKind::BackendExhausted:
      return 3;
    default:
      return 1;
  }
}

}  // namespace evosql
