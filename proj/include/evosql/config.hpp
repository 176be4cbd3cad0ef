#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "evosql/backends.hpp"
#include "evosql/gateway.hpp"
#include "evosql/search.hpp"

namespace evosql {

enum class BackendKind { Synthetic, Scripted, Live };

std::optional<BackendKind> parse_backend_kind(const std::string& name);
const char* backend_kind_name(BackendKind kind);

struct RunConfig {
  std::string dataset_root;
  BackendKind backend = BackendKind::Synthetic;
  std::string scenario_path;  // required for the scripted backend

  // live backend; the key is read from the named environment variable.
  // An empty env name opts out of auth for local endpoints.
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o-mini";
  std::string api_key_env = "OPENAI_API_KEY";
  int max_in_flight = 4;

  int pool_samples = 20;      // N
  double crossover_p = 0.5;   // p
  // indexed by Role: difficulty, schema_subset, gen_query, critic, mutate
  std::array<double, kRoleCount> temperatures = {1.0, 1.0, 1.0, 0.2, 1.0};
  int max_output_tokens = 1024;
  IterationsMode iterations_mode = IterationsMode::Prose;
  Strategy strategy = Strategy::SumOfRewards;

  int timeout_ms = 30000;
  int max_rows = 10000;
  uint64_t seed = 1;
  int concurrency = 4;
  int difficulty_samples = 1;
  int difficulty_min = 1;
  int difficulty_max = 5;
  int preview_rows = 20;
  bool redact_traces = false;
  std::string prompt_dir;  // optional per-role template overrides
};

// Throws ConfigError on any invalid field. Runs before anything touches a
// backend or the dataset.
void validate_config(const RunConfig& config);

std::shared_ptr<LlmBackend> make_backend(const RunConfig& config);
std::array<RoleConfig, kRoleCount> role_configs(const RunConfig& config);
GatewayOptions gateway_options(const RunConfig& config);
SearchOptions search_options(const RunConfig& config);
ExecLimits exec_limits(const RunConfig& config);
PromptLibrary prompt_library(const RunConfig& config);

}  // namespace evosql
