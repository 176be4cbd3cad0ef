#include "evosql/search.hpp"

#include <algorithm>
#include <chrono>
#include <future>

#include "evosql/errors.hpp"
#include "evosql/sqltext.hpp"
#include "evosql/util.hpp"
#include "json.hpp"

namespace evosql {

int depth_limit(int difficulty) { return difficulty / 2 + 1; }

std::optional<IterationsMode> parse_iterations_mode(const std::string& name) {
  std::string n = to_lower(trim(name));
  if (n == "prose") return IterationsMode::Prose;
  if (n == "alg1") return IterationsMode::Alg1;
  return std::nullopt;
}

const char* iterations_mode_name(IterationsMode mode) {
  return mode == IterationsMode::Prose ? "prose" : "alg1";
}

StepResult refine_step(const RefinementItem& item, SearchContext& ctx) {
  StepResult result;

  std::string sql;
  if (std::holds_alternative<SchemaSubset>(item.payload)) {
    sql = ctx.gateway.generate_query(
        ctx.task, std::get<SchemaSubset>(item.payload), ctx.schema,
        mix_seed(ctx.chain_seed, "gen", {static_cast<uint64_t>(item.depth)}));
  } else {
    sql = std::get<std::string>(item.payload);
  }

  ExecutionResult exec = execute(sql, ctx.db_path, ctx.limits);
  if (!exec.ok()) return result;  // errored candidates leave the pool silently

  OutputKey key = output_key(exec, has_toplevel_order_by(sql));
  std::string preview = render_preview(exec, ctx.gateway.options().preview_rows);
  Critique critique = ctx.gateway.critique(
      ctx.task, item.origin, ctx.schema, sql, preview,
      mix_seed(ctx.chain_seed, "critic", {static_cast<uint64_t>(item.depth)}));

  BufferEntry entry;
  entry.sql = sql;
  entry.reward = reward(critique.s, critique.t, critique.k);
  entry.output = key;
  entry.critique = {critique.s, critique.k, critique.t};
  entry.preview_rows = split_lines(preview);
  entry.chain_id = item.chain_id;
  entry.depth = item.depth;
  entry.iteration = ctx.iteration;
  result.entry = std::move(entry);

  if (critique.needs_changes() && item.depth < ctx.depth_cap) {
    try {
      std::string mutated = ctx.gateway.mutate_query(
          ctx.task, item.origin, ctx.schema, sql, critique,
          mix_seed(ctx.chain_seed, "mutate", {static_cast<uint64_t>(item.depth)}));
      result.next = RefinementItem{std::move(mutated), item.origin, item.depth + 1, item.chain_id};
    } catch (const Error& e) {
      result.note = e.what();  // the entry stands; only the chain ends here
    }
  }
  return result;
}

namespace {

struct ChainOutcome {
  Buffer entries;
  std::vector<std::string> notes;
};

ChainOutcome run_chain(RefinementItem item, SearchContext ctx) {
  ChainOutcome outcome;
  while (true) {
    StepResult step;
    try {
      step = refine_step(item, ctx);
    } catch (const Error& e) {
      outcome.notes.push_back(e.what());
      break;
    }
    if (step.entry) outcome.entries.push_back(std::move(*step.entry));
    if (!step.note.empty()) outcome.notes.push_back(step.note);
    if (!step.next) break;
    item = std::move(*step.next);
  }
  return outcome;
}

int median_difficulty(std::vector<int> values) {
  std::sort(values.begin(), values.end());
  // even counts take the lower middle so the result stays an integer level
  return values[(values.size() - 1) / 2];
}

}  // namespace

SolutionReport run_task(const Task& task, const FullSchema& schema, const std::string& db_path,
                        const SearchOptions& options, Gateway& gateway, uint64_t seed) {
  auto started = std::chrono::steady_clock::now();
  SolutionReport report;

  std::vector<int> scores;
  for (int i = 0; i < std::max(1, options.difficulty_samples); ++i) {
    try {
      scores.push_back(gateway.score_difficulty(
          task, schema, mix_seed(seed, "difficulty", {static_cast<uint64_t>(i)})));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnparsableDifficulty) throw;
      scores.push_back(options.fallback_difficulty);
      report.notes.push_back(e.what());
    }
  }
  const int C = median_difficulty(std::move(scores));
  report.difficulty = C;
  report.iterations = options.iterations_mode == IterationsMode::Alg1 ? C + 1 : C;
  const int depth_cap = depth_limit(C);

  SeedPool pool;
  bool have_pool = true;
  try {
    pool = seed_pool(task, schema, options.pool_samples, gateway, mix_seed(seed, "pool"));
  } catch (const Error& e) {
    have_pool = false;
    report.notes.push_back(e.what());
  }

  int next_chain_id = 0;
  const size_t width = options.concurrency < 1 ? 1 : static_cast<size_t>(options.concurrency);

  for (int iter = 0; have_pool && iter < report.iterations; ++iter) {
    std::vector<std::string> fps;
    for (const auto& member : pool.members) fps.push_back(member.fingerprint());
    report.pool_fingerprints.push_back(std::move(fps));

    std::vector<RefinementItem> items;
    for (const auto& member : pool.members)
      items.push_back(RefinementItem{member, member, 0, next_chain_id++});

    // Chains run in bounded waves; outcomes merge in launch order, so the
    // buffer is identical to a sequential run.
    std::vector<ChainOutcome> outcomes(items.size());
    for (size_t base = 0; base < items.size(); base += width) {
      size_t count = std::min(width, items.size() - base);
      std::vector<std::future<ChainOutcome>> wave;
      for (size_t i = 0; i < count; ++i) {
        SearchContext ctx{task,
                          schema,
                          gateway,
                          db_path,
                          options.limits,
                          depth_cap,
                          mix_seed(seed, "chain",
                                   {static_cast<uint64_t>(iter),
                                    static_cast<uint64_t>(items[base + i].chain_id)}),
                          iter};
        wave.push_back(std::async(std::launch::async, run_chain, items[base + i], ctx));
      }
      for (size_t i = 0; i < count; ++i) outcomes[base + i] = wave[i].get();
    }

    for (auto& outcome : outcomes) {
      for (auto& entry : outcome.entries) report.buffer.push_back(std::move(entry));
      for (auto& note : outcome.notes) report.notes.push_back(std::move(note));
    }

    if (pool.size() >= 2) {
      Rng rng(mix_seed(seed, "evolve", {static_cast<uint64_t>(iter)}));
      try {
        pool = evolve_pool(pool, options.crossover_p, rng);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EvolutionStalled) throw;
        report.notes.push_back(e.what());  // keep the previous pool
      }
    }
  }

  if (report.buffer.empty()) {
    report.failure_reason = "no_candidates";
  } else {
    Selection selection = select_query(report.buffer, options.strategy);
    report.chosen_sql = selection.sql;
    report.tally = std::move(selection.tally);
  }

  for (size_t i = 0; i < kRoleCount; ++i)
    report.call_counts[i] = gateway.calls(static_cast<Role>(i));
  report.events = gateway.take_events();
  std::sort(report.events.begin(), report.events.end(), [](const LlmEvent& a, const LlmEvent& b) {
    if (a.seed != b.seed) return a.seed < b.seed;
    if (a.role != b.role) return static_cast<int>(a.role) < static_cast<int>(b.role);
    return a.prompt < b.prompt;
  });

  report.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  return report;
}

std::string report_canonical_json(const SolutionReport& report) {
  nlohmann::json doc;
  doc["chosen_sql"] = report.chosen_sql ? nlohmann::json(*report.chosen_sql) : nlohmann::json();
  doc["failure_reason"] = report.failure_reason;
  doc["difficulty"] = report.difficulty;
  doc["iterations"] = report.iterations;

  nlohmann::json buffer = nlohmann::json::array();
  for (const auto& entry : report.buffer) {
    buffer.push_back({{"sql", entry.sql},
                      {"reward", entry.reward},
                      {"output", entry.output.value},
                      {"score", entry.critique.score},
                      {"confidence", entry.critique.confidence},
                      {"temperature", entry.critique.temperature},
                      {"preview", entry.preview_rows},
                      {"chain_id", entry.chain_id},
                      {"depth", entry.depth},
                      {"iteration", entry.iteration}});
  }
  doc["buffer"] = std::move(buffer);
  doc["pools"] = report.pool_fingerprints;
  doc["call_counts"] = report.call_counts;

  if (report.tally) {
    nlohmann::json tally;
    tally["strategy"] = strategy_name(report.tally->strategy);
    tally["winner"] = report.tally->winner.value;
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& [key, agg] : report.tally->per_key) {
      keys.push_back({{"key", key.value},
                      {"sum", agg.sum},
                      {"max", agg.max},
                      {"mean", agg.mean},
                      {"count", agg.count},
                      {"sql", agg.representative_sql}});
    }
    tally["keys"] = std::move(keys);
    doc["tally"] = std::move(tally);
  } else {
    doc["tally"] = nullptr;
  }

  nlohmann::json events = nlohmann::json::array();
  for (const auto& event : report.events) {
    events.push_back({{"role", role_name(event.role)},
                      {"prompt", event.prompt},
                      {"response", event.response},
                      {"seed", event.seed},
                      {"temperature", event.temperature}});
  }
  doc["events"] = std::move(events);
  doc["notes"] = report.notes;
  return doc.dump();
}

}  // namespace evosql
