#pragma once

#include <string>
#include <vector>

namespace evosql {

// Lexes SQL into tokens. Lexing is total: characters that fit no rule pass
// through as single-char tokens. Keywords/identifiers are case-folded to
// lower case (including the content of quoted identifiers); string-literal
// contents are preserved verbatim; comments are dropped.
std::vector<std::string> tokenize_sql(const std::string& sql);

// Normalized token string: tokens joined by single spaces, trailing
// semicolons dropped. Idempotent.
std::string canonicalize_sql(const std::string& sql);

// True when the outermost query contains ORDER BY (paren depth 0).
bool has_toplevel_order_by(const std::string& sql);

// Pulls a single SELECT/WITH statement out of raw LLM output: prefers the
// first code fence containing one, strips leading prose, and cuts at the
// first top-level semicolon. Throws NoSqlFound when no SELECT/WITH is
// present and NonSelectStatement when the response holds DDL/DML instead
// (or a WITH whose main statement is not a SELECT).
std::string extract_select_statement(const std::string& raw);

}  // namespace evosql
