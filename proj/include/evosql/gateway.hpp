#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "evosql/schema.hpp"
#include "evosql/voting.hpp"

namespace evosql {

enum class Role { Difficulty, SchemaSubset, GenQuery, Critic, Mutate };
constexpr size_t kRoleCount = 5;

const char* role_name(Role role);
std::optional<Role> parse_role(const std::string& name);

struct RoleConfig {
  Role role = Role::GenQuery;
  std::string model_name = "gpt-4o-mini";
  double sampling_temperature = 1.0;
  int max_output_tokens = 1024;
};

// Default sampling temperatures: schema_subset 1.0, gen_query 1.0,
// critic 0.2, mutate 1.0, difficulty 1.0.
std::array<RoleConfig, kRoleCount> default_role_configs(const std::string& model_name);

struct Critique {
  double s = 0.0;          // score
  double k = 0.0;          // confidence
  double t = 0.0;          // mutation temperature
  std::string assessment;  // empty means no changes needed

  bool needs_changes() const { return !assessment.empty(); }
};

// Backend contract. Scripted and synthetic backends are pure functions of
// (role, prompt, seed) and safe for concurrent use.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(Role role, const std::string& prompt, const RoleConfig& config,
                               uint64_t seed) = 0;
  virtual const char* name() const = 0;
};

// Prompt templates for the five roles. Placeholders: {question}, {hint},
// {schema_block}, {candidate_sql}, {output_preview}, {assessment},
// {mutation_temperature}.
class PromptLibrary {
 public:
  PromptLibrary();  // built-in defaults

  // Overrides from a directory of <role>.txt files; missing files keep the
  // built-in template.
  static PromptLibrary from_directory(const std::string& dir);

  const std::string& text(Role role) const { return templates_[static_cast<size_t>(role)]; }
  void set(Role role, std::string tmpl) { templates_[static_cast<size_t>(role)] = std::move(tmpl); }

 private:
  std::array<std::string, kRoleCount> templates_;
};

struct LlmEvent {
  Role role;
  std::string prompt;
  std::string response;
  uint64_t seed = 0;
  double temperature = 0.0;
};

// --- response parsing (exposed for tests and reuse) -------------------------

// First integer in free text, or nullopt.
std::optional<long long> first_integer(const std::string& text);

// Parses the critic's key/value payload. s, k, t are clamped into [0, 1];
// a missing assessment is the empty string. Throws MalformedCritique when
// any of score/confidence/mutation_temperature is missing or non-numeric.
Critique parse_critique(const std::string& raw);

// Parses "table.column" mentions, resolving each against the schema; pairs
// that do not exist are silently dropped. Throws EmptyAfterFilter when
// nothing survives.
SchemaSubset parse_pair_list(const std::string& raw, const FullSchema& schema);

// --- the five role operations ------------------------------------------------

struct GatewayOptions {
  int difficulty_min = 1;
  int difficulty_max = 5;
  size_t preview_rows = 20;
  bool include_example_values = true;
  bool include_foreign_keys = true;
};

// Uniform access to the five roles over one backend. Cheap to construct;
// make one per task so call counts and recorded events stay task-local.
class Gateway {
 public:
  Gateway(std::shared_ptr<LlmBackend> backend, const PromptLibrary& prompts,
          std::array<RoleConfig, kRoleCount> configs, GatewayOptions options = {});

  // Difficulty score in [min, max]; the first integer in the response,
  // clamped. Throws UnparsableDifficulty when no integer is present.
  int score_difficulty(const Task& task, const FullSchema& schema, uint64_t seed);

  SchemaSubset propose_subset(const Task& task, const FullSchema& schema, uint64_t seed);

  std::string generate_query(const Task& task, const SchemaSubset& subset,
                             const FullSchema& schema, uint64_t seed,
                             std::optional<double> temperature_override = std::nullopt,
                             std::optional<uint64_t> render_seed = std::nullopt);

  Critique critique(const Task& task, const SchemaSubset& subset, const FullSchema& schema,
                    const std::string& candidate_sql, const std::string& output_preview,
                    uint64_t seed);

  std::string mutate_query(const Task& task, const SchemaSubset& subset, const FullSchema& schema,
                           const std::string& candidate_sql, const Critique& critique,
                           uint64_t seed);

  uint64_t calls(Role role) const { return calls_[static_cast<size_t>(role)].load(); }

  // Events are recorded in call order under a lock; copy them out when the
  // task is done.
  std::vector<LlmEvent> take_events();

  const GatewayOptions& options() const { return options_; }

 private:
  std::string invoke(Role role, const std::string& prompt, uint64_t seed,
                     std::optional<double> temperature_override = std::nullopt);
  std::string render_block(const SchemaSubset& subset, const FullSchema& schema,
                           std::optional<uint64_t> render_seed = std::nullopt) const;

  std::shared_ptr<LlmBackend> backend_;
  PromptLibrary prompts_;
  std::array<RoleConfig, kRoleCount> configs_;
  GatewayOptions options_;
  std::array<std::atomic<uint64_t>, kRoleCount> calls_{};
  std::mutex events_mutex_;
  std::vector<LlmEvent> events_;
};

}  // namespace evosql
