#include "evosql/executor.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "evosql/errors.hpp"
#include "evosql/sqltext.hpp"
#include "evosql/util.hpp"

namespace evosql {
namespace {

struct TimeoutState {
  std::chrono::steady_clock::time_point deadline;
  bool fired = false;
};

int progress_callback(void* ctx) {
  auto* state = static_cast<TimeoutState*>(ctx);
  if (std::chrono::steady_clock::now() >= state->deadline) {
    state->fired = true;
    return 1;  // interrupt
  }
  return 0;
}

ExecError classify_prepare_error(sqlite3* db) {
  std::string msg = sqlite3_errmsg(db);
  std::string lower = to_lower(msg);
  if (lower.find("no such table") != std::string::npos ||
      lower.find("no such column") != std::string::npos ||
      lower.find("no such view") != std::string::npos)
    return {ExecErrorKind::MissingRelation, msg};
  if (lower.find("syntax error") != std::string::npos ||
      lower.find("unrecognized token") != std::string::npos ||
      lower.find("incomplete input") != std::string::npos)
    return {ExecErrorKind::Syntax, msg};
  return {ExecErrorKind::Other, msg};
}

Value read_value(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_NULL:
      return std::monostate{};
    case SQLITE_INTEGER:
      return static_cast<int64_t>(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT:
      return sqlite3_column_double(stmt, col);
    case SQLITE_BLOB: {
      const auto* data = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, col));
      int len = sqlite3_column_bytes(stmt, col);
      static const char* hex = "0123456789abcdef";
      std::string out = "0x";
      for (int i = 0; i < len; ++i) {
        out += hex[data[i] >> 4];
        out += hex[data[i] & 0xf];
      }
      return out;
    }
    default: {
      const unsigned char* text = sqlite3_column_text(stmt, col);
      return std::string(text ? reinterpret_cast<const char*>(text) : "");
    }
  }
}

}  // namespace

ExecutionResult execute(const std::string& sql, const std::string& db_path,
                        const ExecLimits& limits) {
  ExecutionResult result;
  auto started = std::chrono::steady_clock::now();
  auto finish = [&]() {
    result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    return result;
  };

  // Reject recognizable non-SELECT statements up front; anything else that
  // is not SELECT/WITH falls through so SQLite can report the real problem
  // (e.g. "SELEC 1" is a syntax error, not a policy violation).
  {
    std::string trimmed = trim(sql);
    size_t end = 0;
    while (end < trimmed.size() && std::isalpha(static_cast<unsigned char>(trimmed[end]))) ++end;
    std::string verb = to_lower(trimmed.substr(0, end));
    static const char* kRejected[] = {"insert",  "update",   "delete", "replace", "drop",
                                      "create",  "alter",    "pragma", "attach",  "detach",
                                      "vacuum",  "begin",    "commit", "rollback", "analyze",
                                      "reindex", "savepoint", "release", "explain"};
    for (const char* bad : kRejected) {
      if (verb == bad) {
        result.error =
            ExecError{ExecErrorKind::NotSelect, "only SELECT/WITH statements are executed"};
        return finish();
      }
    }
  }

  sqlite3* db = nullptr;
  if (sqlite3_open_v2(db_path.c_str(), &db, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
    result.error = ExecError{ExecErrorKind::Open,
                             db ? sqlite3_errmsg(db) : "cannot open database"};
    sqlite3_close(db);
    return finish();
  }

  TimeoutState timeout{started + limits.timeout};
  sqlite3_progress_handler(db, 500, progress_callback, &timeout);

  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  int rc = sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, &tail);
  if (rc != SQLITE_OK || stmt == nullptr) {
    result.error = stmt == nullptr && rc == SQLITE_OK
                       ? ExecError{ExecErrorKind::Syntax, "empty statement"}
                       : classify_prepare_error(db);
    if (timeout.fired) result.error = ExecError{ExecErrorKind::Timeout, "query timed out"};
    sqlite3_finalize(stmt);
    sqlite3_close(db);
    return finish();
  }
  if (tail && !trim(tail).empty()) {
    result.error = ExecError{ExecErrorKind::Syntax, "multiple statements are not allowed"};
    sqlite3_finalize(stmt);
    sqlite3_close(db);
    return finish();
  }
  if (!sqlite3_stmt_readonly(stmt)) {
    result.error = ExecError{ExecErrorKind::NotReadOnly, "statement would modify the database"};
    sqlite3_finalize(stmt);
    sqlite3_close(db);
    return finish();
  }

  int ncols = sqlite3_column_count(stmt);
  for (int i = 0; i < ncols; ++i) {
    const char* name = sqlite3_column_name(stmt, i);
    result.column_names.push_back(name ? name : "");
  }

  while (true) {
    rc = sqlite3_step(stmt);
    if (rc == SQLITE_ROW) {
      if (result.rows.size() >= limits.max_rows) {
        result.truncated = true;
        break;
      }
      Row row;
      row.reserve(static_cast<size_t>(ncols));
      for (int i = 0; i < ncols; ++i) row.push_back(read_value(stmt, i));
      result.rows.push_back(std::move(row));
      continue;
    }
    if (rc == SQLITE_DONE) break;
    if (rc == SQLITE_INTERRUPT || timeout.fired) {
      result.error = ExecError{ExecErrorKind::Timeout, "query exceeded time limit"};
    } else {
      result.error = ExecError{ExecErrorKind::Other, sqlite3_errmsg(db)};
    }
    result.rows.clear();
    result.column_names.clear();
    break;
  }

  sqlite3_finalize(stmt);
  sqlite3_close(db);
  return finish();
}

std::string normalize_cell(const Value& value) {
  if (std::holds_alternative<std::monostate>(value)) return "z";
  if (std::holds_alternative<int64_t>(value)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "n:%lld", static_cast<long long>(std::get<int64_t>(value)));
    return buf;
  }
  if (std::holds_alternative<double>(value)) {
    double v = std::get<double>(value);
    if (std::isnan(v)) return "n:nan";
    if (std::isinf(v)) return v > 0 ? "n:inf" : "n:-inf";
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    std::string s = buf;
    // trim trailing zeros, then a trailing dot; -0 folds to 0
    size_t end = s.size();
    while (end > 0 && s[end - 1] == '0') --end;
    if (end > 0 && s[end - 1] == '.') --end;
    s.resize(end);
    if (s == "-0" || s.empty()) s = "0";
    return "n:" + s;
  }
  return "t:" + rtrim(std::get<std::string>(value));
}

OutputKey output_key(const ExecutionResult& result, bool order_sensitive) {
  if (!result.ok())
    throw Error(ErrorKind::ErroredExecution, "output_key on an errored execution");

  std::vector<std::string> encoded;
  encoded.reserve(result.rows.size());
  for (const auto& row : result.rows) {
    std::string line;
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) line += '\x1f';
      line += normalize_cell(row[i]);
    }
    encoded.push_back(std::move(line));
  }
  if (!order_sensitive) std::sort(encoded.begin(), encoded.end());

  std::string key = result.truncated ? "T|" : "";
  for (size_t i = 0; i < encoded.size(); ++i) {
    if (i) key += '\x1e';
    key += encoded[i];
  }
  return OutputKey{std::move(key)};
}

std::string render_preview(const ExecutionResult& result, size_t max_rows) {
  if (!result.ok()) return "(error: " + result.error->message + ")";
  std::string out;
  for (size_t i = 0; i < result.column_names.size(); ++i) {
    if (i) out += " | ";
    out += result.column_names[i];
  }
  out += "\n";
  size_t shown = std::min(result.rows.size(), max_rows);
  for (size_t r = 0; r < shown; ++r) {
    const Row& row = result.rows[r];
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += " | ";
      if (std::holds_alternative<std::monostate>(row[i])) {
        out += "NULL";
      } else {
        std::string cell = normalize_cell(row[i]);
        out += cell.substr(cell.find(':') + 1);
      }
    }
    out += "\n";
  }
  if (result.rows.size() > shown || result.truncated) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "(%zu of %zu%s rows shown)\n", shown, result.rows.size(),
                  result.truncated ? "+" : "");
    out += buf;
  }
  return out;
}

}  // namespace evosql
