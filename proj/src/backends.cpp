#include "evosql/backends.hpp"

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include "evosql/errors.hpp"
#include "evosql/sqltext.hpp"
#include "evosql/util.hpp"
#include "json.hpp"

#ifdef EVOSQL_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

namespace evosql {

// --- scripted ---------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<Record> records) : records_(std::move(records)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  return from_json_text(read_text_file(path));
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json_text(const std::string& text) {
  auto doc = nlohmann::json::parse(text, nullptr, false);
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array())
    throw Error(ErrorKind::ConfigError, "scenario must be an object with a records array");
  std::vector<Record> records;
  for (const auto& item : doc["records"]) {
    Record r;
    auto role = parse_role(item.value("role", ""));
    if (!role) throw Error(ErrorKind::ConfigError, "scenario record with unknown role");
    r.role = *role;
    r.match = item.value("match", "");
    if (item.contains("seed")) r.seed = item["seed"].get<uint64_t>();
    if (!item.contains("response") || !item["response"].is_string())
      throw Error(ErrorKind::ConfigError, "scenario record without response");
    r.response = item["response"].get<std::string>();
    r.sticky = item.value("sticky", false);
    records.push_back(std::move(r));
  }
  return std::make_shared<ScriptedBackend>(std::move(records));
}

std::string ScriptedBackend::complete(Role role, const std::string& prompt, const RoleConfig&,
                                      uint64_t seed) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& record : records_) {
    if (record.used && !record.sticky) continue;
    if (record.role != role) continue;
    if (record.seed && *record.seed != seed) continue;
    if (!record.match.empty() && prompt.find(record.match) == std::string::npos) continue;
    record.used = true;
    return record.response;
  }
  std::string head = prompt.substr(0, 120);
  throw Error(ErrorKind::BackendExhausted,
              std::string("no scripted response for role ") + role_name(role) + ", prompt: " + head);
}

size_t ScriptedBackend::remaining() const {
  std::lock_guard<std::mutex> lock(mutex_);
  size_t n = 0;
  for (const auto& r : records_)
    if (!r.used && !r.sticky) ++n;
  return n;
}

// --- synthetic --------------------------------------------------------------

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

std::string fenced_sql(const std::string& sql) { return "```sql\n" + sql + "\n```"; }

std::string candidate_from_prompt(const std::string& prompt) {
  // The built-in critic/mutate templates place the SQL after this marker;
  // cutting there keeps prose mentions of SELECT out of the extraction.
  size_t at = prompt.find("Candidate query:");
  try {
    return extract_select_statement(at == std::string::npos ? prompt : prompt.substr(at));
  } catch (const Error&) {
    return "SELECT 1";
  }
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

std::vector<SchemaPair> SyntheticBackend::pairs_in_prompt(const std::string& prompt) {
  std::vector<SchemaPair> pairs;
  std::set<SchemaPair> seen;
  for (const auto& line : split_lines(prompt)) {
    std::string t = trim(line);
    size_t space = t.find_first_of(" \t");
    std::string token = space == std::string::npos ? t : t.substr(0, space);
    size_t dot = token.find('.');
    if (dot == std::string::npos) continue;
    std::string table = token.substr(0, dot);
    std::string column = token.substr(dot + 1);
    if (!is_identifier(table) || !is_identifier(column)) continue;
    SchemaPair pair{table, column};
    if (seen.insert(pair).second) pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::string SyntheticBackend::complete(Role role, const std::string& prompt,
                                       const RoleConfig& config, uint64_t seed) {
  switch (role) {
    case Role::Difficulty: {
      uint64_t v = 1 + hash64(prompt) % 5;
      return "Difficulty: " + std::to_string(v);
    }

    case Role::SchemaSubset: {
      auto pairs = pairs_in_prompt(prompt);
      if (pairs.empty()) return "none";
      Rng rng(mix_seed(seed, "pick", {hash64(prompt)}));
      size_t k = 2 + static_cast<size_t>(rng.below(3));
      if (k > pairs.size()) k = pairs.size();
      std::vector<size_t> order(pairs.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
      std::string out;
      for (size_t i = 0; i < k; ++i)
        out += pairs[order[i]].first + "." + pairs[order[i]].second + "\n";
      return out;
    }

    case Role::GenQuery: {
      auto ordered = pairs_in_prompt(prompt);
      if (ordered.empty()) return fenced_sql("SELECT 1");

      std::vector<SchemaPair> sorted = ordered;
      std::sort(sorted.begin(), sorted.end());
      std::string select_list, from_list;
      std::set<std::string> tables;
      for (const auto& p : sorted) {
        if (!select_list.empty()) select_list += ", ";
        select_list += p.first + "." + p.second;
        tables.insert(p.first);
      }
      for (const auto& t : tables) {
        if (!from_list.empty()) from_list += ", ";
        from_list += t;
      }

      // The filter depends on the first two pairs as rendered, so the query
      // carries the block ordering; the pair order inside the filter does not.
      std::vector<SchemaPair> head(ordered.begin(),
                                   ordered.begin() + std::min<size_t>(2, ordered.size()));
      std::sort(head.begin(), head.end());
      std::string where;
      for (const auto& p : head) {
        if (!where.empty()) where += " AND ";
        where += p.first + "." + p.second + " IS NOT NULL";
      }

      std::string sql = "SELECT " + select_list + " FROM " + from_list + " WHERE " + where;
      double q = clamp01(config.sampling_temperature);
      Rng rng(mix_seed(seed, "noise", {hash64(prompt)}));
      if (rng.unit() < q) sql += " LIMIT " + std::to_string(1 + rng.below(6));
      return fenced_sql(sql);
    }

    case Role::Critic: {
      Rng rng(mix_seed(hash64(prompt), "critic"));
      double s = 0.35 + 0.6 * rng.unit();
      double k = 0.55 + 0.4 * rng.unit();
      double t = 0.05 + 0.5 * rng.unit();
      bool done = rng.unit() < 0.45;
      static const char* kAssessments[] = {
          "add a LIMIT clause to bound the output",
          "filter the first selected column with a WHERE condition",
          "drop columns that the question does not ask for",
      };
      std::string assessment = done ? "" : kAssessments[rng.below(3)];
      std::ostringstream out;
      out << "```\n"
          << "score: " << format_score(s) << "\n"
          << "confidence: " << format_score(k) << "\n"
          << "mutation_temperature: " << format_score(t) << "\n"
          << "assessment: " << assessment << "\n"
          << "```";
      return out.str();
    }

    case Role::Mutate: {
      std::string candidate = candidate_from_prompt(prompt);
      auto tokens = tokenize_sql(candidate);
      uint64_t old_limit = 0;
      bool had_limit = false;
      if (tokens.size() >= 2 && tokens[tokens.size() - 2] == "limit") {
        const std::string& last = tokens.back();
        if (!last.empty() && last.find_first_not_of("0123456789") == std::string::npos) {
          had_limit = true;
          old_limit = std::stoull(last);
          tokens.resize(tokens.size() - 2);
        }
      }
      std::string base;
      for (const auto& tok : tokens) {
        if (!base.empty()) base += " ";
        base += tok;
      }
      Rng rng(mix_seed(seed, "mutate", {hash64(prompt)}));
      uint64_t next_limit = had_limit ? 1 + (old_limit + rng.below(8)) % 9 : 1 + rng.below(9);
      return fenced_sql(base + " LIMIT " + std::to_string(next_limit));
    }
  }
  throw Error(ErrorKind::BackendFailure, "unhandled role");
}

// --- http -------------------------------------------------------------------

namespace {

// Caps concurrent requests; max_in_flight is a runtime value, so a plain
// mutex/condvar gate is used instead of std::counting_semaphore.
class Gate {
 public:
  explicit Gate(int slots) : available_(slots) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
  }

  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++available_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int available_;
};

struct GateSlot {
  explicit GateSlot(Gate& gate) : gate_(gate) { gate_.acquire(); }
  ~GateSlot() { gate_.release(); }
  Gate& gate_;
};

}  // namespace

struct HttpBackend::Impl {
  HttpBackendOptions options;
  std::string scheme_host;  // e.g. "https://api.openai.com"
  std::string path_prefix;  // e.g. "/v1"
  std::string api_key;
  Gate gate;

  explicit Impl(HttpBackendOptions opts) : options(std::move(opts)), gate(options.max_in_flight) {
    const std::string& url = options.base_url;
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
      throw Error(ErrorKind::ConfigError, "base_url needs a scheme: " + url);
    size_t path_start = url.find('/', scheme_end + 3);
    scheme_host = path_start == std::string::npos ? url : url.substr(0, path_start);
    if (path_start != std::string::npos) {
      path_prefix = url.substr(path_start);
      while (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();
    }
#ifndef EVOSQL_HAVE_OPENSSL
    if (url.rfind("https://", 0) == 0)
      throw Error(ErrorKind::ConfigError, "built without TLS support; use an http:// endpoint");
#endif
    if (!options.api_key_env.empty()) {
      const char* key = std::getenv(options.api_key_env.c_str());
      if (key) api_key = key;
    }
  }
};

HttpBackend::HttpBackend(HttpBackendOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::complete(Role, const std::string& prompt, const RoleConfig& config,
                                  uint64_t seed) {
  nlohmann::json body{
      {"model", config.model_name},
      {"temperature", config.sampling_temperature},
      {"max_tokens", config.max_output_tokens},
      {"seed", static_cast<int64_t>(seed & 0x7fffffff)},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  std::string payload = body.dump();
  std::string path = impl_->path_prefix + "/chat/completions";

  GateSlot slot(impl_->gate);
  std::string last_error;
  for (int attempt = 0; attempt <= impl_->options.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(impl_->options.retry_backoff_ms * (1 << (attempt - 1))));

    httplib::Client client(impl_->scheme_host);
    client.set_connection_timeout(impl_->options.timeout_sec, 0);
    client.set_read_timeout(impl_->options.timeout_sec, 0);
    client.set_write_timeout(impl_->options.timeout_sec, 0);
    httplib::Headers headers;
    if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);

    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw Error(ErrorKind::BackendFailure,
                  "status " + std::to_string(res->status) + ": " + res->body.substr(0, 200));

    auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty())
      throw Error(ErrorKind::BackendFailure, "response without choices: " + res->body.substr(0, 200));
    const auto& message = doc["choices"][0]["message"];
    if (!message.is_object() || !message.contains("content") || !message["content"].is_string())
      throw Error(ErrorKind::BackendFailure, "choice without message content");
    return message["content"].get<std::string>();
  }
  throw Error(ErrorKind::BackendFailure, "retries exhausted; last: " + last_error);
}

}  // namespace evosql
