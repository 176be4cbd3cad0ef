#include "evosql/sqltext.hpp"

#include <cctype>

#include "evosql/errors.hpp"
#include "evosql/util.hpp"

namespace evosql {
namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Scans a quoted region with doubled-quote escapes; returns one past the
// closing quote (or end of input when unterminated).
size_t scan_quoted(const std::string& s, size_t start, char quote) {
  size_t i = start + 1;
  while (i < s.size()) {
    if (s[i] == quote) {
      if (i + 1 < s.size() && s[i + 1] == quote) {
        i += 2;
        continue;
      }
      return i + 1;
    }
    ++i;
  }
  return i;
}

size_t scan_number(const std::string& s, size_t start) {
  size_t i = start;
  if (s.compare(i, 2, "0x") == 0 || s.compare(i, 2, "0X") == 0) {
    i += 2;
    while (i < s.size() && std::isxdigit(static_cast<unsigned char>(s[i]))) ++i;
    return i;
  }
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    size_t exp = i + 1;
    if (exp < s.size() && (s[exp] == '+' || s[exp] == '-')) ++exp;
    if (exp < s.size() && std::isdigit(static_cast<unsigned char>(s[exp]))) {
      i = exp;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    }
  }
  return i;
}

bool is_two_char_op(const std::string& s, size_t i) {
  if (i + 1 >= s.size()) return false;
  char a = s[i], b = s[i + 1];
  return (a == '<' && (b == '=' || b == '>' || b == '<')) || (a == '>' && (b == '=' || b == '>')) ||
         (a == '!' && b == '=') || (a == '=' && b == '=') || (a == '|' && b == '|');
}

}  // namespace

std::vector<std::string> tokenize_sql(const std::string& sql) {
  std::vector<std::string> tokens;
  size_t i = 0;
  const size_t n = sql.size();
  while (i < n) {
    char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      size_t end = sql.find("*/", i + 2);
      i = (end == std::string::npos) ? n : end + 2;
      continue;
    }
    if (c == '\'') {
      size_t end = scan_quoted(sql, i, '\'');
      tokens.push_back(sql.substr(i, end - i));  // literal contents verbatim
      i = end;
      continue;
    }
    if (c == '"' || c == '`') {
      size_t end = scan_quoted(sql, i, c);
      tokens.push_back(to_lower(sql.substr(i, end - i)));
      i = end;
      continue;
    }
    if (c == '[') {
      size_t end = sql.find(']', i + 1);
      end = (end == std::string::npos) ? n : end + 1;
      tokens.push_back(to_lower(sql.substr(i, end - i)));
      i = end;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t end = scan_number(sql, i);
      tokens.push_back(to_lower(sql.substr(i, end - i)));
      i = end;
      continue;
    }
    if (is_ident_start(c)) {
      size_t end = i + 1;
      while (end < n && is_ident_char(sql[end])) ++end;
      tokens.push_back(to_lower(sql.substr(i, end - i)));
      i = end;
      continue;
    }
    if (is_two_char_op(sql, i)) {
      tokens.push_back(sql.substr(i, 2));
      i += 2;
      continue;
    }
    tokens.push_back(std::string(1, c));
    ++i;
  }
  return tokens;
}

std::string canonicalize_sql(const std::string& sql) {
  std::vector<std::string> tokens = tokenize_sql(sql);
  while (!tokens.empty() && tokens.back() == ";") tokens.pop_back();
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool has_toplevel_order_by(const std::string& sql) {
  std::vector<std::string> tokens = tokenize_sql(sql);
  int depth = 0;
  for (size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i] == "(") ++depth;
    else if (tokens[i] == ")") --depth;
    else if (depth == 0 && tokens[i] == "order" && tokens[i + 1] == "by") return true;
  }
  return false;
}

namespace {

// Case-insensitive keyword-at check on raw text with word boundaries.
bool keyword_at(const std::string& text, size_t pos, const char* kw) {
  size_t len = 0;
  while (kw[len]) ++len;
  if (pos + len > text.size()) return false;
  for (size_t i = 0; i < len; ++i)
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != kw[i]) return false;
  if (pos > 0 && is_ident_char(text[pos - 1])) return false;
  if (pos + len < text.size() && is_ident_char(text[pos + len])) return false;
  return true;
}

size_t find_keyword(const std::string& text, std::initializer_list<const char*> kws) {
  for (size_t i = 0; i < text.size(); ++i) {
    if (!is_ident_start(text[i])) continue;
    for (const char* kw : kws)
      if (keyword_at(text, i, kw)) return i;
    while (i < text.size() && is_ident_char(text[i])) ++i;
  }
  return std::string::npos;
}

// Cuts at the first semicolon outside quotes/comments.
std::string first_statement(const std::string& text) {
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\'' || c == '"' || c == '`') {
      i = scan_quoted(text, i, c);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      size_t end = text.find("*/", i + 2);
      i = (end == std::string::npos) ? text.size() : end + 2;
      continue;
    }
    if (c == ';') return text.substr(0, i);
    ++i;
  }
  return text;
}

// For a WITH statement, the main verb after the CTE definitions must be
// SELECT; SQLite also accepts WITH ... INSERT/UPDATE/DELETE.
bool with_main_verb_is_select(const std::string& stmt) {
  std::vector<std::string> tokens = tokenize_sql(stmt);
  int depth = 0;
  for (const auto& tok : tokens) {
    if (tok == "(") ++depth;
    else if (tok == ")") --depth;
    else if (depth == 0) {
      if (tok == "select") return true;
      if (tok == "insert" || tok == "update" || tok == "delete" || tok == "replace") return false;
    }
  }
  return false;
}

const std::initializer_list<const char*> kOtherStatementKeywords = {
    "insert", "update", "delete", "drop",   "create", "alter",
    "replace", "pragma", "attach", "detach", "vacuum",
};

// Extracts from the first SELECT/WITH onward. Leading prose is dropped even
// when it happens to contain verbs like "create"; a response with no
// SELECT/WITH at all but some other statement verb flags found_other.
std::string extract_from_region(const std::string& region, bool& found_other) {
  size_t sel = find_keyword(region, {"select", "with"});
  if (sel == std::string::npos) {
    if (find_keyword(region, kOtherStatementKeywords) != std::string::npos) found_other = true;
    return "";
  }
  return trim(first_statement(region.substr(sel)));
}

}  // namespace

namespace {

// Offsets of fence delimiter lines: a ``` at the start of a line, allowing
// markdown's up-to-three spaces of indentation. Inline backticks in prose
// are not delimiters.
std::vector<size_t> fence_lines(const std::string& raw) {
  std::vector<size_t> offsets;
  size_t line = 0;
  while (line <= raw.size()) {
    size_t i = line;
    while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t') && i - line < 4) ++i;
    if (raw.compare(i, 3, "```") == 0) offsets.push_back(i);
    size_t nl = raw.find('\n', line);
    if (nl == std::string::npos) break;
    line = nl + 1;
  }
  return offsets;
}

}  // namespace

std::string extract_select_statement(const std::string& raw) {
  bool found_other = false;

  // Fenced blocks first; the first fence holding a SELECT/WITH wins.
  std::vector<size_t> fences = fence_lines(raw);
  for (size_t f = 0; f + 1 < fences.size(); f += 2) {
    size_t body = raw.find('\n', fences[f]);
    if (body == std::string::npos || body >= fences[f + 1]) continue;
    std::string stmt = extract_from_region(raw.substr(body + 1, fences[f + 1] - body - 1),
                                           found_other);
    if (!stmt.empty()) {
      std::string head = to_lower(stmt.substr(0, 4));
      if (head == "with" && !with_main_verb_is_select(stmt))
        throw Error(ErrorKind::NonSelectStatement, "WITH statement does not end in SELECT");
      return stmt;
    }
  }

  std::string stmt = extract_from_region(raw, found_other);
  if (stmt.empty()) {
    if (found_other)
      throw Error(ErrorKind::NonSelectStatement, "response contains a non-SELECT statement");
    throw Error(ErrorKind::NoSqlFound, "no SELECT/WITH statement in response");
  }
  if (to_lower(stmt.substr(0, 4)) == "with" && !with_main_verb_is_select(stmt))
    throw Error(ErrorKind::NonSelectStatement, "WITH statement does not end in SELECT");
  return stmt;
}

}  // namespace evosql
