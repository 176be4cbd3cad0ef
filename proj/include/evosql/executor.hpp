#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace evosql {

// A result cell. monostate encodes SQL NULL.
using Value = std::variant<std::monostate, int64_t, double, std::string>;
using Row = std::vector<Value>;

enum class ExecErrorKind { Syntax, MissingRelation, Timeout, NotReadOnly, NotSelect, Open, Other };

struct ExecError {
  ExecErrorKind kind;
  std::string message;
};

struct ExecutionResult {
  std::optional<ExecError> error;  // error and rows are mutually exclusive
  std::vector<Row> rows;
  std::vector<std::string> column_names;
  bool truncated = false;
  std::chrono::milliseconds elapsed{0};

  bool ok() const { return !error.has_value(); }
};

struct ExecLimits {
  std::chrono::milliseconds timeout{30000};
  size_t max_rows = 10000;
};

// Runs a single SELECT/WITH statement against the database, read-only.
// Rows are capped at limits.max_rows with the truncated flag set; hitting
// the cap is not an error. Execution failures come back as error values.
ExecutionResult execute(const std::string& sql, const std::string& db_path,
                        const ExecLimits& limits = {});

// Canonical form of one cell: integers and reals unified, reals rounded to
// 6 decimal places, text trimmed of trailing whitespace, NULL a distinct
// sentinel. Used by both output keys and row-level metric matching.
std::string normalize_cell(const Value& value);

struct OutputKey {
  std::string value;

  bool operator==(const OutputKey& other) const { return value == other.value; }
  bool operator<(const OutputKey& other) const { return value < other.value; }
};

// Canonical identity of an execution output. Rows are sorted unless
// order_sensitive; multiset semantics are preserved either way. Truncated
// results key differently from complete ones with the same visible rows.
// Throws ErroredExecution when called on an error result.
OutputKey output_key(const ExecutionResult& result, bool order_sensitive);

// Human-readable preview of the first `max_rows` rows (header + rows),
// used for critic prompts and trace records.
std::string render_preview(const ExecutionResult& result, size_t max_rows = 20);

}  // namespace evosql
