#include "evosql/config.hpp"

#include <cstdlib>

#include "evosql/errors.hpp"
#include "evosql/util.hpp"

namespace evosql {

std::optional<BackendKind> parse_backend_kind(const std::string& name) {
  std::string n = to_lower(trim(name));
  if (n == "synthetic") return BackendKind::Synthetic;
  if (n == "scripted") return BackendKind::Scripted;
  if (n == "live") return BackendKind::Live;
  return std::nullopt;
}

const char* backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::Synthetic: return "synthetic";
    case BackendKind::Scripted: return "scripted";
    case BackendKind::Live: return "live";
  }
  return "?";
}

void validate_config(const RunConfig& config) {
  auto fail = [](const std::string& message) { throw Error(ErrorKind::ConfigError, message); };
  if (config.pool_samples < 1) fail("pool_samples must be >= 1");
  if (config.crossover_p < 0.0 || config.crossover_p > 1.0)
    fail("crossover_p must lie in [0,1]");
  for (size_t i = 0; i < kRoleCount; ++i)
    if (config.temperatures[i] < 0.0 || config.temperatures[i] > 2.0)
      fail(std::string("temperature for ") + role_name(static_cast<Role>(i)) +
           " must lie in [0,2]");
  if (config.max_output_tokens < 1) fail("max_output_tokens must be >= 1");
  if (config.timeout_ms < 1) fail("timeout_ms must be >= 1");
  if (config.max_rows < 1) fail("max_rows must be >= 1");
  if (config.concurrency < 1) fail("concurrency must be >= 1");
  if (config.max_in_flight < 1) fail("max_in_flight must be >= 1");
  if (config.difficulty_samples < 1) fail("difficulty_samples must be >= 1");
  if (config.difficulty_min < 1 || config.difficulty_min > config.difficulty_max)
    fail("difficulty range must satisfy 1 <= min <= max");
  if (config.preview_rows < 1) fail("preview_rows must be >= 1");
  if (config.backend == BackendKind::Scripted && config.scenario_path.empty())
    fail("scripted backend needs a scenario path");
}

std::shared_ptr<LlmBackend> make_backend(const RunConfig& config) {
  switch (config.backend) {
    case BackendKind::Synthetic:
      return std::make_shared<SyntheticBackend>();
    case BackendKind::Scripted:
      return ScriptedBackend::from_file(config.scenario_path);
    case BackendKind::Live: {
      if (!config.api_key_env.empty() && std::getenv(config.api_key_env.c_str()) == nullptr)
        throw Error(ErrorKind::ConfigError,
                    "environment variable " + config.api_key_env + " is not set");
      HttpBackendOptions options;
      options.base_url = config.base_url;
      options.api_key_env = config.api_key_env;
      options.max_in_flight = config.max_in_flight;
      return std::make_shared<HttpBackend>(options);
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown backend kind");
}

std::array<RoleConfig, kRoleCount> role_configs(const RunConfig& config) {
  auto configs = default_role_configs(config.model_name);
  for (size_t i = 0; i < kRoleCount; ++i) {
    configs[i].sampling_temperature = config.temperatures[i];
    configs[i].max_output_tokens = config.max_output_tokens;
  }
  return configs;
}

GatewayOptions gateway_options(const RunConfig& config) {
  GatewayOptions options;
  options.difficulty_min = config.difficulty_min;
  options.difficulty_max = config.difficulty_max;
  options.preview_rows = static_cast<size_t>(config.preview_rows);
  return options;
}

SearchOptions search_options(const RunConfig& config) {
  SearchOptions options;
  options.pool_samples = config.pool_samples;
  options.crossover_p = config.crossover_p;
  options.iterations_mode = config.iterations_mode;
  options.strategy = config.strategy;
  options.limits = exec_limits(config);
  options.difficulty_samples = config.difficulty_samples;
  options.concurrency = config.concurrency;
  return options;
}

ExecLimits exec_limits(const RunConfig& config) {
  ExecLimits limits;
  limits.timeout = std::chrono::milliseconds(config.timeout_ms);
  limits.max_rows = static_cast<size_t>(config.max_rows);
  return limits;
}

PromptLibrary prompt_library(const RunConfig& config) {
  if (config.prompt_dir.empty()) return PromptLibrary();
  return PromptLibrary::from_directory(config.prompt_dir);
}

}  // namespace evosql
