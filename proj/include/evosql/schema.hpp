#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace evosql {

struct ColumnDef {
  std::string name;
  std::string datatype;                     // declared SQL type, may be empty
  std::vector<std::string> example_values;  // up to 3 distinct non-null values,
                                            // rendered as display strings
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;

  const ColumnDef* find_column(const std::string& name) const;
};

struct ForeignKey {
  std::string table;
  std::string column;
  std::string ref_table;
  std::string ref_column;
};

// A (table, column) pair in schema-canonical casing.
using SchemaPair = std::pair<std::string, std::string>;

class FullSchema {
 public:
  std::string db_id;
  std::vector<TableDef> tables;
  std::vector<ForeignKey> foreign_keys;

  const TableDef* find_table(const std::string& name) const;

  // Case-insensitive lookup resolving to the schema's canonical casing.
  std::optional<SchemaPair> resolve_pair(const std::string& table,
                                         const std::string& column) const;

  bool contains_pair(const SchemaPair& pair) const;

  // Every (table, column) pair in declaration order.
  std::vector<SchemaPair> pair_universe() const;
};

// A set of table-column pairs; the unit of prompt seeding and evolution.
// Immutable once built. The empty subset is representable (its fingerprint is
// the fixed constant "[]") but is only ever used as an error sentinel.
class SchemaSubset {
 public:
  SchemaSubset() = default;
  explicit SchemaSubset(std::set<SchemaPair> pairs);

  const std::set<SchemaPair>& pairs() const { return pairs_; }
  const std::string& fingerprint() const { return fingerprint_; }
  size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  bool contains(const SchemaPair& pair) const { return pairs_.count(pair) > 0; }

  bool operator==(const SchemaSubset& other) const { return pairs_ == other.pairs_; }

 private:
  std::set<SchemaPair> pairs_;
  std::string fingerprint_;
};

// Canonical, order-independent identity of a pair set: a JSON array of
// [table, column] pairs sorted by (table, column). No hashing, so distinct
// pair sets can never collide.
std::string fingerprint(const std::set<SchemaPair>& pairs);
inline std::string fingerprint(const SchemaSubset& subset) { return subset.fingerprint(); }

enum class Tier { Simple, Moderate, Challenging };

std::optional<Tier> parse_tier(const std::string& name);
const char* tier_name(Tier tier);

// One benchmark problem.
struct Task {
  int64_t question_id = -1;
  std::string db_id;
  std::string question;
  std::string hint;                  // may be empty
  std::optional<std::string> gold_sql;
  std::optional<Tier> difficulty_tier;
};

enum class BlockOrdering { Fixed, SeededRandom };

struct RenderOptions {
  BlockOrdering ordering = BlockOrdering::Fixed;
  uint64_t seed = 0;                 // used when ordering == SeededRandom
  bool include_example_values = true;
  bool include_foreign_keys = true;  // FK lines cover pairs inside the subset
  size_t max_value_chars = 48;
};

// Loads every user table with every column, its declared type, and up to 3
// distinct example values (the first distinct non-null values in table
// order). Foreign-key metadata is loaded as well.
FullSchema load_schema(const std::string& db_path);

// Renders one schema line per pair of `subset`, plus optional FK lines.
// Fixed ordering follows the schema's declaration order; seeded-random is a
// deterministic permutation of it. Throws PairNotInSchema when the subset is
// not contained in `schema`.
std::string render_schema_block(const SchemaSubset& subset, const FullSchema& schema,
                                const RenderOptions& options = {});

// The pair lines of a rendered block (FK lines and blanks excluded).
std::vector<std::string> schema_block_lines(const std::string& block);

}  // namespace evosql
