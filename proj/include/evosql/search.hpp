#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "evosql/evolution.hpp"
#include "evosql/executor.hpp"
#include "evosql/gateway.hpp"
#include "evosql/voting.hpp"

namespace evosql {

// Returns floor(C/2) + 1, the per-chain refinement depth bound.
int depth_limit(int difficulty);

// Outer-loop count: Prose runs the cycle C times; Alg1 runs C+1 (the
// pseudocode loops while C >= 0 after decrementing).
enum class IterationsMode { Prose, Alg1 };

std::optional<IterationsMode> parse_iterations_mode(const std::string& name);
const char* iterations_mode_name(IterationsMode mode);

struct SearchOptions {
  int pool_samples = 20;       // N subset proposals per task
  double crossover_p = 0.5;    // crossover probability during pool evolution
  IterationsMode iterations_mode = IterationsMode::Prose;
  Strategy strategy = Strategy::SumOfRewards;
  ExecLimits limits;
  int difficulty_samples = 1;  // >1 aggregates by median
  int fallback_difficulty = 3; // used when the difficulty response has no integer
  int concurrency = 4;         // refinement chains in flight per task
};

// One queue item of a refinement chain: either a seed subset awaiting its
// first generation, or an already-refined candidate query.
struct RefinementItem {
  std::variant<SchemaSubset, std::string> payload;
  SchemaSubset origin;  // the subset this chain was seeded from
  int depth = 0;
  int chain_id = -1;
};

struct SearchContext {
  const Task& task;
  const FullSchema& schema;
  Gateway& gateway;
  std::string db_path;
  ExecLimits limits;
  int depth_cap = 1;        // depth_limit(C)
  uint64_t chain_seed = 0;  // base seed for this chain's calls
  int iteration = 0;
};

struct StepResult {
  std::optional<BufferEntry> entry;
  std::optional<RefinementItem> next;
  std::string note;  // nonempty when a non-fatal error was swallowed (logged upstream)
};

// One refinement step. Seed subsets are first turned into SQL via
// generate_query; refined candidates are executed directly. An execution
// error ends the chain with no buffer entry. Otherwise the candidate is
// critiqued and recorded; when the assessment is nonempty and depth allows,
// the mutated query becomes the next item. Gateway errors before an entry
// exists propagate; a failed mutation keeps the entry and ends the chain.
StepResult refine_step(const RefinementItem& item, SearchContext& ctx);

struct SolutionReport {
  std::optional<std::string> chosen_sql;  // absent on failure
  std::string failure_reason;             // set when chosen_sql is absent
  int difficulty = 0;                     // C
  int iterations = 0;
  Buffer buffer;
  std::vector<std::vector<std::string>> pool_fingerprints;  // per iteration, at entry
  std::array<uint64_t, kRoleCount> call_counts{};
  std::optional<VoteTally> tally;
  std::vector<LlmEvent> events;  // sorted by seed for a canonical order
  std::vector<std::string> notes;
  int64_t wall_ms = 0;
};

// Full task pipeline: difficulty, seed pool, `iterations(C)` rounds of
// concurrent refinement chains (one per pool member) with pool evolution
// between rounds, then final selection. Deterministic given a deterministic
// backend and seed; wall_ms is the only nondeterministic field.
SolutionReport run_task(const Task& task, const FullSchema& schema, const std::string& db_path,
                        const SearchOptions& options, Gateway& gateway, uint64_t seed);

// Canonical JSON rendering of a report, excluding wall_ms. Equal reports
// (up to wall time) produce identical bytes.
std::string report_canonical_json(const SolutionReport& report);

}  // namespace evosql
