#include "evosql/gateway.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "evosql/errors.hpp"
#include "evosql/sqltext.hpp"
#include "evosql/util.hpp"
#include "json.hpp"

namespace evosql {
namespace {

const char* kDifficultyTemplate =
    "Rate how difficult the following database question is to answer with a single SQL "
    "query.\n"
    "Respond with one integer between {difficulty_min} and {difficulty_max}, where "
    "{difficulty_min} is trivial and {difficulty_max} is extremely hard. Respond with the "
    "integer only.\n"
    "\n"
    "Question: {question}\n"
    "Hint: {hint}\n"
    "\n"
    "Database schema:\n"
    "{schema_block}";

const char* kSchemaSubsetTemplate =
    "Select the tables and columns needed to answer the question below.\n"
    "Respond with one table.column pair per line and nothing else. Use only pairs that "
    "appear in the schema.\n"
    "\n"
    "Question: {question}\n"
    "Hint: {hint}\n"
    "\n"
    "Database schema:\n"
    "{schema_block}";

const char* kGenQueryTemplate =
    "Write a single SQLite SELECT query that answers the question. Use only the tables and "
    "columns listed below. Respond with the SQL inside a ```sql fence.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Relevant schema:\n"
    "{schema_block}";

const char* kCriticTemplate =
    "Evaluate how well the candidate SQL query answers the question, judging by its "
    "execution output. Reply with exactly this fenced block and nothing else:\n"
    "```\n"
    "score: <number in [0,1], how well the output answers the question>\n"
    "confidence: <number in [0,1], your confidence in the score>\n"
    "mutation_temperature: <number in [0,1], how much the query still needs to change>\n"
    "assessment: <one line of concrete changes; leave empty when none are needed>\n"
    "```\n"
    "\n"
    "Question: {question}\n"
    "Hint: {hint}\n"
    "\n"
    "Relevant schema:\n"
    "{schema_block}\n"
    "\n"
    "Candidate query:\n"
    "```sql\n"
    "{candidate_sql}\n"
    "```\n"
    "\n"
    "Execution output (first rows):\n"
    "{output_preview}";

const char* kMutateTemplate =
    "Revise the candidate SQL query so that it answers the question, applying the "
    "assessment below. The mutation temperature is {mutation_temperature}; change the "
    "query roughly in proportion to it (0 means a minimal edit, 1 means a rewrite).\n"
    "Respond with a single SQLite SELECT query inside a ```sql fence.\n"
    "\n"
    "Question: {question}\n"
    "Hint: {hint}\n"
    "\n"
    "Relevant schema:\n"
    "{schema_block}\n"
    "\n"
    "Candidate query:\n"
    "```sql\n"
    "{candidate_sql}\n"
    "```\n"
    "\n"
    "Assessment: {assessment}";

std::string format_unit(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Strips a leading list marker: "-", "*", "3.", "3)".
std::string strip_bullet(std::string piece) {
  std::string s = trim(piece);
  if (!s.empty() && (s[0] == '-' || s[0] == '*')) return trim(s.substr(1));
  size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) return trim(s.substr(i + 1));
  return s;
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  while (s.size() >= 2) {
    char a = s.front(), b = s.back();
    if ((a == '`' && b == '`') || (a == '"' && b == '"') || (a == '\'' && b == '\'')) {
      s = trim(s.substr(1, s.size() - 2));
    } else {
      break;
    }
  }
  return s;
}

std::optional<double> parse_number(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || !std::isfinite(v)) return std::nullopt;
  return v;
}

double clamp_unit(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

const char* role_name(Role role) {
  switch (role) {
    case Role::Difficulty: return "difficulty";
    case Role::SchemaSubset: return "schema_subset";
    case Role::GenQuery: return "gen_query";
    case Role::Critic: return "critic";
    case Role::Mutate: return "mutate";
  }
  return "?";
}

std::optional<Role> parse_role(const std::string& name) {
  std::string n = to_lower(trim(name));
  if (n == "difficulty") return Role::Difficulty;
  if (n == "schema_subset") return Role::SchemaSubset;
  if (n == "gen_query") return Role::GenQuery;
  if (n == "critic") return Role::Critic;
  if (n == "mutate") return Role::Mutate;
  return std::nullopt;
}

std::array<RoleConfig, kRoleCount> default_role_configs(const std::string& model_name) {
  std::array<RoleConfig, kRoleCount> configs;
  auto set = [&](Role role, double temperature) {
    RoleConfig& c = configs[static_cast<size_t>(role)];
    c.role = role;
    c.model_name = model_name;
    c.sampling_temperature = temperature;
  };
  set(Role::Difficulty, 1.0);
  set(Role::SchemaSubset, 1.0);
  set(Role::GenQuery, 1.0);
  set(Role::Critic, 0.2);
  set(Role::Mutate, 1.0);
  return configs;
}

PromptLibrary::PromptLibrary() {
  set(Role::Difficulty, kDifficultyTemplate);
  set(Role::SchemaSubset, kSchemaSubsetTemplate);
  set(Role::GenQuery, kGenQueryTemplate);
  set(Role::Critic, kCriticTemplate);
  set(Role::Mutate, kMutateTemplate);
}

PromptLibrary PromptLibrary::from_directory(const std::string& dir) {
  PromptLibrary lib;
  for (size_t i = 0; i < kRoleCount; ++i) {
    Role role = static_cast<Role>(i);
    std::filesystem::path path = std::filesystem::path(dir) / (std::string(role_name(role)) + ".txt");
    if (std::filesystem::exists(path)) lib.set(role, read_text_file(path.string()));
  }
  return lib;
}

std::optional<long long> first_integer(const std::string& text) {
  for (size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    size_t start = i;
    bool negative = i > 0 && text[i - 1] == '-';
    size_t end = i;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    std::string digits = text.substr(start, end - start);
    if (digits.size() > 18) digits = digits.substr(0, 18);
    long long v = std::stoll(digits);
    return negative ? -v : v;
  }
  return std::nullopt;
}

Critique parse_critique(const std::string& raw) {
  std::optional<double> s, k, t;
  std::optional<std::string> assessment;

  auto take = [&](const std::string& key, const std::string& value) {
    if (iequals(key, "score") && !s) s = parse_number(value);
    else if (iequals(key, "confidence") && !k) k = parse_number(value);
    else if (iequals(key, "mutation_temperature") && !t) t = parse_number(value);
    else if (iequals(key, "assessment") && !assessment) assessment = trim(value);
  };

  for (const auto& line : split_lines(raw)) {
    size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    take(trim(line.substr(0, colon)), line.substr(colon + 1));
  }

  // JSON payloads are accepted as a fallback.
  if (!s || !k || !t) {
    std::string body = trim(raw);
    size_t brace = body.find('{');
    if (brace != std::string::npos) {
      auto parsed = nlohmann::json::parse(body.substr(brace), nullptr, false);
      if (parsed.is_object()) {
        auto num = [&](const char* key) -> std::optional<double> {
          if (!parsed.contains(key)) return std::nullopt;
          const auto& v = parsed[key];
          if (v.is_number()) return v.get<double>();
          if (v.is_string()) return parse_number(v.get<std::string>());
          return std::nullopt;
        };
        if (!s) s = num("score");
        if (!k) k = num("confidence");
        if (!t) t = num("mutation_temperature");
        if (!assessment && parsed.contains("assessment") && parsed["assessment"].is_string())
          assessment = trim(parsed["assessment"].get<std::string>());
      }
    }
  }

  if (!s || !k || !t)
    throw Error(ErrorKind::MalformedCritique,
                "missing or non-numeric score/confidence/mutation_temperature");

  Critique out;
  out.s = clamp_unit(*s);
  out.k = clamp_unit(*k);
  out.t = clamp_unit(*t);
  out.assessment = assessment.value_or("");
  return out;
}

SchemaSubset parse_pair_list(const std::string& raw, const FullSchema& schema) {
  std::set<SchemaPair> pairs;
  for (const auto& line : split_lines(raw)) {
    std::string stripped = line;
    // fences and prose headers have no dot-separated pairs worth parsing
    if (stripped.rfind("```", 0) == 0) continue;
    size_t start = 0;
    while (start <= stripped.size()) {
      size_t comma = stripped.find(',', start);
      std::string piece = comma == std::string::npos ? stripped.substr(start)
                                                     : stripped.substr(start, comma - start);
      piece = strip_quotes(strip_bullet(piece));
      size_t dot = piece.find('.');
      if (dot != std::string::npos && dot > 0) {
        std::string table = strip_quotes(piece.substr(0, dot));
        std::string column = strip_quotes(piece.substr(dot + 1));
        if (!table.empty() && !column.empty()) {
          if (auto resolved = schema.resolve_pair(table, column)) pairs.insert(*resolved);
        }
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (pairs.empty())
    throw Error(ErrorKind::EmptyAfterFilter, "no proposed pair exists in the schema");
  return SchemaSubset(std::move(pairs));
}

Gateway::Gateway(std::shared_ptr<LlmBackend> backend, const PromptLibrary& prompts,
                 std::array<RoleConfig, kRoleCount> configs, GatewayOptions options)
    : backend_(std::move(backend)), prompts_(prompts), configs_(configs), options_(options) {}

std::string Gateway::render_block(const SchemaSubset& subset, const FullSchema& schema,
                                  std::optional<uint64_t> render_seed) const {
  RenderOptions opts;
  opts.include_example_values = options_.include_example_values;
  opts.include_foreign_keys = options_.include_foreign_keys;
  if (render_seed) {
    opts.ordering = BlockOrdering::SeededRandom;
    opts.seed = *render_seed;
  }
  return render_schema_block(subset, schema, opts);
}

std::string Gateway::invoke(Role role, const std::string& prompt, uint64_t seed,
                            std::optional<double> temperature_override) {
  RoleConfig config = configs_[static_cast<size_t>(role)];
  if (temperature_override) config.sampling_temperature = *temperature_override;
  std::string response = backend_->complete(role, prompt, config, seed);
  calls_[static_cast<size_t>(role)].fetch_add(1);
  {
    std::lock_guard<std::mutex> lock(events_mutex_);
    events_.push_back({role, prompt, response, seed, config.sampling_temperature});
  }
  return response;
}

int Gateway::score_difficulty(const Task& task, const FullSchema& schema, uint64_t seed) {
  auto universe = schema.pair_universe();
  SchemaSubset full{std::set<SchemaPair>(universe.begin(), universe.end())};
  char lo[16], hi[16];
  std::snprintf(lo, sizeof(lo), "%d", options_.difficulty_min);
  std::snprintf(hi, sizeof(hi), "%d", options_.difficulty_max);
  std::string prompt = fill_template(prompts_.text(Role::Difficulty),
                                     {{"question", task.question},
                                      {"hint", task.hint},
                                      {"schema_block", render_block(full, schema)},
                                      {"difficulty_min", lo},
                                      {"difficulty_max", hi}});
  std::string response = invoke(Role::Difficulty, prompt, seed);
  auto value = first_integer(response);
  if (!value) throw Error(ErrorKind::UnparsableDifficulty, "no integer in: " + response);
  long long v = *value;
  if (v < options_.difficulty_min) v = options_.difficulty_min;
  if (v > options_.difficulty_max) v = options_.difficulty_max;
  return static_cast<int>(v);
}

SchemaSubset Gateway::propose_subset(const Task& task, const FullSchema& schema, uint64_t seed) {
  auto universe = schema.pair_universe();
  SchemaSubset full{std::set<SchemaPair>(universe.begin(), universe.end())};
  std::string prompt = fill_template(prompts_.text(Role::SchemaSubset),
                                     {{"question", task.question},
                                      {"hint", task.hint},
                                      {"schema_block", render_block(full, schema)}});
  std::string response = invoke(Role::SchemaSubset, prompt, seed);
  return parse_pair_list(response, schema);
}

std::string Gateway::generate_query(const Task& task, const SchemaSubset& subset,
                                    const FullSchema& schema, uint64_t seed,
                                    std::optional<double> temperature_override,
                                    std::optional<uint64_t> render_seed) {
  std::string prompt = fill_template(prompts_.text(Role::GenQuery),
                                     {{"question", task.question},
                                      {"schema_block", render_block(subset, schema, render_seed)}});
  std::string response = invoke(Role::GenQuery, prompt, seed, temperature_override);
  return extract_select_statement(response);
}

Critique Gateway::critique(const Task& task, const SchemaSubset& subset, const FullSchema& schema,
                           const std::string& candidate_sql, const std::string& output_preview,
                           uint64_t seed) {
  std::string prompt = fill_template(prompts_.text(Role::Critic),
                                     {{"question", task.question},
                                      {"hint", task.hint},
                                      {"schema_block", render_block(subset, schema)},
                                      {"candidate_sql", candidate_sql},
                                      {"output_preview", output_preview}});
  std::string response = invoke(Role::Critic, prompt, seed);
  return parse_critique(response);
}

std::string Gateway::mutate_query(const Task& task, const SchemaSubset& subset,
                                  const FullSchema& schema, const std::string& candidate_sql,
                                  const Critique& critique, uint64_t seed) {
  if (critique.assessment.empty())
    throw Error(ErrorKind::DomainError, "mutate_query requires a nonempty assessment");
  std::string prompt = fill_template(prompts_.text(Role::Mutate),
                                     {{"question", task.question},
                                      {"hint", task.hint},
                                      {"schema_block", render_block(subset, schema)},
                                      {"candidate_sql", candidate_sql},
                                      {"assessment", critique.assessment},
                                      {"mutation_temperature", format_unit(critique.t)}});
  std::string response = invoke(Role::Mutate, prompt, seed);
  return extract_select_statement(response);
}

std::vector<LlmEvent> Gateway::take_events() {
  std::lock_guard<std::mutex> lock(events_mutex_);
  std::vector<LlmEvent> out;
  out.swap(events_);
  return out;
}

}  // namespace evosql
