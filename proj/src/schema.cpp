#include "evosql/schema.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cstdio>
#include <memory>

#include "evosql/errors.hpp"
#include "evosql/util.hpp"
#include "json.hpp"

namespace evosql {
namespace {

struct DbCloser {
  void operator()(sqlite3* db) const { sqlite3_close(db); }
};
struct StmtFinalizer {
  void operator()(sqlite3_stmt* stmt) const { sqlite3_finalize(stmt); }
};
using DbHandle = std::unique_ptr<sqlite3, DbCloser>;
using StmtHandle = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

StmtHandle prepare(sqlite3* db, const std::string& sql) {
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
    throw Error(ErrorKind::UnreadableDatabase,
                std::string("introspection failed: ") + sqlite3_errmsg(db));
  }
  return StmtHandle(stmt);
}

std::string quote_ident(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

std::string column_text(sqlite3_stmt* stmt, int idx) {
  const unsigned char* text = sqlite3_column_text(stmt, idx);
  return text ? reinterpret_cast<const char*>(text) : "";
}

// Display form of a cell for example values; blobs are summarized.
std::string render_value(sqlite3_stmt* stmt, int idx) {
  switch (sqlite3_column_type(stmt, idx)) {
    case SQLITE_INTEGER: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%lld",
                    static_cast<long long>(sqlite3_column_int64(stmt, idx)));
      return buf;
    }
    case SQLITE_FLOAT: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6g", sqlite3_column_double(stmt, idx));
      return buf;
    }
    case SQLITE_BLOB: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "<blob %d bytes>", sqlite3_column_bytes(stmt, idx));
      return buf;
    }
    default:
      return column_text(stmt, idx);
  }
}

std::vector<std::string> sample_example_values(sqlite3* db, const std::string& table,
                                               const std::string& column) {
  std::vector<std::string> values;
  std::string sql = "SELECT " + quote_ident(column) + " FROM " + quote_ident(table) +
                    " WHERE " + quote_ident(column) + " IS NOT NULL";
  StmtHandle stmt = prepare(db, sql);
  while (values.size() < 3 && sqlite3_step(stmt.get()) == SQLITE_ROW) {
    std::string v = render_value(stmt.get(), 0);
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
  }
  return values;
}

}  // namespace

const ColumnDef* TableDef::find_column(const std::string& column_name) const {
  for (const auto& c : columns)
    if (c.name == column_name) return &c;
  return nullptr;
}

const TableDef* FullSchema::find_table(const std::string& table_name) const {
  for (const auto& t : tables)
    if (t.name == table_name) return &t;
  return nullptr;
}

std::optional<SchemaPair> FullSchema::resolve_pair(const std::string& table,
                                                   const std::string& column) const {
  const TableDef* match = find_table(table);
  if (!match) {
    for (const auto& t : tables)
      if (iequals(t.name, table)) {
        match = &t;
        break;
      }
  }
  if (!match) return std::nullopt;
  if (const ColumnDef* c = match->find_column(column)) return SchemaPair{match->name, c->name};
  for (const auto& c : match->columns)
    if (iequals(c.name, column)) return SchemaPair{match->name, c.name};
  return std::nullopt;
}

bool FullSchema::contains_pair(const SchemaPair& pair) const {
  const TableDef* t = find_table(pair.first);
  return t && t->find_column(pair.second) != nullptr;
}

std::vector<SchemaPair> FullSchema::pair_universe() const {
  std::vector<SchemaPair> pairs;
  for (const auto& t : tables)
    for (const auto& c : t.columns) pairs.emplace_back(t.name, c.name);
  return pairs;
}

SchemaSubset::SchemaSubset(std::set<SchemaPair> pairs) : pairs_(std::move(pairs)) {
  fingerprint_ = evosql::fingerprint(pairs_);
}

std::string fingerprint(const std::set<SchemaPair>& pairs) {
  // std::set iterates in sorted (table, column) order already.
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [table, column] : pairs) arr.push_back({table, column});
  return arr.dump();
}

std::optional<Tier> parse_tier(const std::string& name) {
  std::string n = to_lower(trim(name));
  if (n == "simple") return Tier::Simple;
  if (n == "moderate") return Tier::Moderate;
  if (n == "challenging") return Tier::Challenging;
  return std::nullopt;
}

const char* tier_name(Tier tier) {
  switch (tier) {
    case Tier::Simple: return "simple";
    case Tier::Moderate: return "moderate";
    case Tier::Challenging: return "challenging";
  }
  return "?";
}

FullSchema load_schema(const std::string& db_path) {
  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(db_path.c_str(), &raw, SQLITE_OPEN_READONLY, nullptr);
  DbHandle db(raw);
  if (rc != SQLITE_OK) {
    throw Error(ErrorKind::UnreadableDatabase,
                db_path + ": " + (raw ? sqlite3_errmsg(raw) : "open failed"));
  }

  FullSchema schema;
  {
    // sqlite_master rowid order preserves creation order.
    StmtHandle stmt = prepare(db.get(),
                              "SELECT name FROM sqlite_master WHERE type='table' "
                              "AND name NOT LIKE 'sqlite_%'");
    int step;
    while ((step = sqlite3_step(stmt.get())) == SQLITE_ROW) {
      TableDef table;
      table.name = column_text(stmt.get(), 0);
      schema.tables.push_back(std::move(table));
    }
    if (step != SQLITE_DONE)
      throw Error(ErrorKind::UnreadableDatabase, db_path + ": " + sqlite3_errmsg(db.get()));
  }
  if (schema.tables.empty()) throw Error(ErrorKind::EmptySchema, db_path + " has no user tables");

  for (auto& table : schema.tables) {
    StmtHandle info = prepare(db.get(), "PRAGMA table_info(" + quote_ident(table.name) + ")");
    while (sqlite3_step(info.get()) == SQLITE_ROW) {
      ColumnDef col;
      col.name = column_text(info.get(), 1);
      col.datatype = column_text(info.get(), 2);
      table.columns.push_back(std::move(col));
    }
    for (auto& col : table.columns)
      col.example_values = sample_example_values(db.get(), table.name, col.name);

    StmtHandle fks = prepare(db.get(), "PRAGMA foreign_key_list(" + quote_ident(table.name) + ")");
    while (sqlite3_step(fks.get()) == SQLITE_ROW) {
      ForeignKey fk;
      fk.table = table.name;
      fk.ref_table = column_text(fks.get(), 2);
      fk.column = column_text(fks.get(), 3);
      fk.ref_column = column_text(fks.get(), 4);
      if (fk.column.empty()) continue;
      schema.foreign_keys.push_back(std::move(fk));
    }
  }

  // FKs referencing a table's implicit primary key carry no target column;
  // resolve them to the referenced table's declared PK when there is one.
  for (auto& fk : schema.foreign_keys) {
    if (!fk.ref_column.empty()) continue;
    const TableDef* ref = schema.find_table(fk.ref_table);
    if (!ref) continue;
    StmtHandle info = prepare(db.get(), "PRAGMA table_info(" + quote_ident(ref->name) + ")");
    while (sqlite3_step(info.get()) == SQLITE_ROW) {
      if (sqlite3_column_int(info.get(), 5) == 1) {
        fk.ref_column = column_text(info.get(), 1);
        break;
      }
    }
  }

  schema.db_id = db_path;
  size_t slash = schema.db_id.find_last_of('/');
  if (slash != std::string::npos) schema.db_id = schema.db_id.substr(slash + 1);
  size_t dot = schema.db_id.rfind(".sqlite");
  if (dot != std::string::npos) schema.db_id = schema.db_id.substr(0, dot);
  return schema;
}

std::string render_schema_block(const SchemaSubset& subset, const FullSchema& schema,
                                const RenderOptions& options) {
  // Collect the subset's pairs in declaration order.
  std::vector<SchemaPair> ordered;
  for (const auto& table : schema.tables)
    for (const auto& col : table.columns) {
      SchemaPair pair{table.name, col.name};
      if (subset.contains(pair)) ordered.push_back(std::move(pair));
    }
  if (ordered.size() != subset.size()) {
    for (const auto& pair : subset.pairs())
      if (!schema.contains_pair(pair))
        throw Error(ErrorKind::PairNotInSchema, pair.first + "." + pair.second);
  }

  if (options.ordering == BlockOrdering::SeededRandom) {
    Rng rng(options.seed);
    rng.shuffle(ordered);
  }

  std::string block;
  for (const auto& [table_name, column_name] : ordered) {
    const ColumnDef* col = schema.find_table(table_name)->find_column(column_name);
    block += table_name + "." + column_name;
    if (!col->datatype.empty()) block += " (" + col->datatype + ")";
    if (options.include_example_values && !col->example_values.empty()) {
      block += " examples:";
      for (const auto& v : col->example_values) {
        std::string shown = v;
        if (shown.size() > options.max_value_chars)
          shown = shown.substr(0, options.max_value_chars) + "...";
        block += " '" + shown + "'";
      }
    }
    block += "\n";
  }

  if (options.include_foreign_keys) {
    for (const auto& fk : schema.foreign_keys) {
      if (fk.ref_column.empty()) continue;
      if (subset.contains({fk.table, fk.column}) &&
          subset.contains({fk.ref_table, fk.ref_column})) {
        block += "FK: " + fk.table + "." + fk.column + " -> " + fk.ref_table + "." +
                 fk.ref_column + "\n";
      }
    }
  }
  return block;
}

std::vector<std::string> schema_block_lines(const std::string& block) {
  std::vector<std::string> lines;
  for (auto& line : split_lines(block)) {
    if (line.empty()) continue;
    if (line.rfind("FK: ", 0) == 0) continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace evosql
