#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evosql/cli.hpp"

namespace {

std::vector<std::string> expand_traces(std::vector<std::string> paths,
                                       const std::string& trace_dir) {
  if (!trace_dir.empty()) {
    std::vector<std::string> found;
    for (const auto& entry : std::filesystem::directory_iterator(trace_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        found.push_back(entry.path().string());
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  return paths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evosql: difficulty-scaled SQL candidate search with evolved schema-subset seeds"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override");
  app.fallthrough();

  evosql::RunConfig config;
  std::string backend_name = "synthetic";
  std::string iterations_name = "prose";
  std::string strategy_name = "sum_of_rewards";

  app.add_option("--dataset_root", config.dataset_root, "dataset root (dev.json + dev_databases/)");
  app.add_option("--backend", backend_name, "synthetic | scripted | live")
      ->check(CLI::IsMember({"synthetic", "scripted", "live"}));
  app.add_option("--scenario", config.scenario_path, "scenario file for the scripted backend");
  app.add_option("--base_url", config.base_url, "OpenAI-compatible endpoint base URL");
  app.add_option("--model", config.model_name, "model name for the live backend");
  app.add_option("--api_key_env", config.api_key_env,
                 "environment variable holding the API key ('' disables auth)");
  app.add_option("--max_in_flight", config.max_in_flight, "live-backend concurrent request cap");
  app.add_option("--pool_samples", config.pool_samples, "subset proposals per task (N)");
  app.add_option("--crossover_p", config.crossover_p, "crossover probability during evolution");
  app.add_option("--temp_difficulty", config.temperatures[0], "difficulty sampling temperature");
  app.add_option("--temp_schema_subset", config.temperatures[1], "subset sampling temperature");
  app.add_option("--temp_gen_query", config.temperatures[2], "generation sampling temperature");
  app.add_option("--temp_critic", config.temperatures[3], "critic sampling temperature");
  app.add_option("--temp_mutate", config.temperatures[4], "mutation sampling temperature");
  app.add_option("--max_output_tokens", config.max_output_tokens, "completion token cap");
  app.add_option("--iterations_mode", iterations_name, "prose (C outer rounds) | alg1 (C+1)")
      ->check(CLI::IsMember({"prose", "alg1"}));
  app.add_option("--strategy", strategy_name,
                 "sum_of_rewards | majority | highest_reward | highest_avg_reward");
  app.add_option("--timeout_ms", config.timeout_ms, "per-query execution timeout");
  app.add_option("--max_rows", config.max_rows, "row cap per execution");
  app.add_option("--seed", config.seed, "global seed");
  app.add_option("--concurrency", config.concurrency, "refinement chains in flight per task");
  app.add_option("--difficulty_samples", config.difficulty_samples,
                 "difficulty samples (median aggregation)");
  app.add_option("--difficulty_min", config.difficulty_min, "difficulty lower bound");
  app.add_option("--difficulty_max", config.difficulty_max, "difficulty upper bound");
  app.add_option("--preview_rows", config.preview_rows, "rows shown to the critic");
  app.add_flag("--redact_traces", config.redact_traces, "drop prompts/responses from traces");
  app.add_option("--prompt_dir", config.prompt_dir, "directory of <role>.txt template overrides");

  auto* run = app.add_subcommand("run", "run the search pipeline and write predictions");
  evosql::RunArgs run_args;
  run->add_option("--predictions", run_args.predictions_path, "output predictions (JSON lines)");
  run->add_option("--trace_dir", run_args.trace_dir, "write one trace file per task here");
  run->add_option("--only", run_args.only_ids, "restrict to these question ids");
  run->add_flag("--quiet", run_args.quiet, "suppress the summary line");

  auto* eval = app.add_subcommand("eval", "score a predictions file");
  evosql::EvalArgs eval_args;
  eval->add_option("--predictions", eval_args.predictions_path, "predictions file")->required();
  eval->add_option("--report", eval_args.report_path, "write key=value metrics here");
  eval->add_option("--csv", eval_args.csv_path, "write per-record CSV here");
  eval->add_flag("--quiet", eval_args.quiet, "suppress the table");

  auto* ablate = app.add_subcommand("ablate", "re-vote stored buffers under all strategies");
  evosql::AblateArgs ablate_args;
  std::string ablate_trace_dir;
  ablate->add_option("--trace", ablate_args.trace_paths, "trace file(s)");
  ablate->add_option("--trace_dir", ablate_trace_dir, "directory of trace files");
  ablate->add_option("--csv", ablate_args.csv_path, "write the strategy table as CSV");
  ablate->add_flag("--quiet", ablate_args.quiet, "suppress the table");

  auto* diversity = app.add_subcommand("diversity", "uniqueness across sampling regimes");
  evosql::DiversityArgs diversity_args;
  diversity->add_option("--tasks", diversity_args.task_count, "number of tasks");
  diversity->add_option("--n", diversity_args.n, "samples per regime per task");
  diversity->add_option("--temps", diversity_args.temperatures, "temperature grid");
  diversity->add_option("--csv", diversity_args.csv_path, "write the cell grid as CSV");
  diversity->add_flag("--quiet", diversity_args.quiet, "suppress the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  config.backend = *evosql::parse_backend_kind(backend_name);
  config.iterations_mode = *evosql::parse_iterations_mode(iterations_name);
  if (auto strategy = evosql::parse_strategy(strategy_name)) {
    config.strategy = *strategy;
  } else {
    std::fprintf(stderr, "error: unknown strategy '%s'\n", strategy_name.c_str());
    return 1;
  }

  try {
    if (run->parsed()) {
      evosql::cmd_run(config, run_args);
    } else if (eval->parsed()) {
      evosql::cmd_eval(config, eval_args);
    } else if (ablate->parsed()) {
      ablate_args.trace_paths = expand_traces(ablate_args.trace_paths, ablate_trace_dir);
      evosql::cmd_ablate(config, ablate_args);
    } else if (diversity->parsed()) {
      evosql::cmd_diversity(config, diversity_args);
    }
  } catch (const evosql::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return evosql::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
