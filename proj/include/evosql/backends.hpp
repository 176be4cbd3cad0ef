#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "evosql/gateway.hpp"

namespace evosql {

// Replays canned responses. Records are consumed in file order: the first
// unconsumed record whose role matches, whose seed matches (when present),
// and whose match string occurs in the prompt (empty matches anything) is
// returned. Sticky records are never consumed. A call with no matching
// record throws BackendExhausted.
class ScriptedBackend : public LlmBackend {
 public:
  struct Record {
    Role role = Role::GenQuery;
    std::string match;  // substring of the prompt; empty matches any prompt
    std::optional<uint64_t> seed;
    std::string response;
    bool sticky = false;
    bool used = false;
  };

  explicit ScriptedBackend(std::vector<Record> records);

  // JSON scenario: {"records": [{"role": ..., "match": ..., "seed": ...,
  // "response": ..., "sticky": ...}, ...]}.
  static std::shared_ptr<ScriptedBackend> from_file(const std::string& path);
  static std::shared_ptr<ScriptedBackend> from_json_text(const std::string& text);

  std::string complete(Role role, const std::string& prompt, const RoleConfig& config,
                       uint64_t seed) override;
  const char* name() const override { return "scripted"; }

  size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Record> records_;
};

// Deterministic stand-in for a live model: every response is a pure function
// of (role, prompt, seed, temperature). Schema pairs are read back from the
// prompt's "table.column ..." lines, so it only understands schemas whose
// names are plain identifiers.
//
// gen_query responses are built so that query diversity mirrors prompt
// diversity: the SELECT list is the sorted pair set (distinct subsets always
// yield distinct queries), the WHERE clause depends on the first two pairs in
// rendered order (reordering a block changes the query), and with probability
// equal to the sampling temperature a LIMIT 1..6 is appended (temperature 0
// is fully deterministic).
class SyntheticBackend : public LlmBackend {
 public:
  std::string complete(Role role, const std::string& prompt, const RoleConfig& config,
                       uint64_t seed) override;
  const char* name() const override { return "synthetic"; }

  // Pair mentions in prompt order, deduplicated.
  static std::vector<SchemaPair> pairs_in_prompt(const std::string& prompt);
};

struct HttpBackendOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";  // credentials come from the environment only
  int max_retries = 3;
  int retry_backoff_ms = 500;
  int max_in_flight = 4;
  int timeout_sec = 120;
};

// OpenAI-compatible chat completions client. The seed is forwarded in the
// request body; determinism then depends on the server.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  ~HttpBackend() override;

  std::string complete(Role role, const std::string& prompt, const RoleConfig& config,
                       uint64_t seed) override;
  const char* name() const override { return "http"; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evosql
