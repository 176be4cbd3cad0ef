#pragma once

#include <sqlite3.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "evosql/backends.hpp"
#include "evosql/errors.hpp"
#include "evosql/gateway.hpp"
#include "evosql/util.hpp"

namespace evosql::testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    auto base = std::filesystem::temp_directory_path();
    std::mt19937_64 rng(std::random_device{}());
    for (int i = 0; i < 64; ++i) {
      auto candidate = base / (stem + "_" + std::to_string(rng()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate.string();
        return;
      }
    }
    throw Error(ErrorKind::IoError, "could not create a temp directory for " + stem);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

inline void exec_script(const std::string& db_path, const std::string& sql) {
  sqlite3* db = nullptr;
  if (sqlite3_open(db_path.c_str(), &db) != SQLITE_OK)
    throw Error(ErrorKind::IoError, "cannot open " + db_path);
  char* err = nullptr;
  int rc = sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err);
  std::string message = err ? err : "";
  sqlite3_free(err);
  sqlite3_close(db);
  if (rc != SQLITE_OK) throw Error(ErrorKind::IoError, "fixture script failed: " + message);
}

// frpm(CDSCode, CharterSchool) + schools(CDSCode), with an FK between them.
inline std::string make_frpm_db(const TempDir& dir) {
  std::string path = dir.file("frpm.sqlite");
  exec_script(path,
              "CREATE TABLE schools (CDSCode TEXT PRIMARY KEY);"
              "CREATE TABLE frpm (CDSCode TEXT REFERENCES schools(CDSCode), CharterSchool TEXT);"
              "INSERT INTO schools VALUES ('01'),('02'),('03'),('04');"
              "INSERT INTO frpm VALUES ('01','Y'),('02','N'),('03','Y'),('04',NULL);");
  return path;
}

// items/sales micro-store used by executor, eval, and pipeline tests.
inline std::string make_shop_db(const std::string& path) {
  exec_script(path,
              "CREATE TABLE items (id INTEGER PRIMARY KEY, name TEXT, price REAL);"
              "CREATE TABLE sales (item_id INTEGER REFERENCES items(id), qty INTEGER);"
              "INSERT INTO items VALUES (1,'apple',1.5),(2,'pear',2.0),(3,'fig',9.75);"
              "INSERT INTO sales VALUES (1,4),(2,1),(3,2),(1,3);");
  return path;
}

// BIRD-layout snapshot: dev.json + dev_databases/shop/shop.sqlite. Six tasks,
// two per tier; gold queries all execute.
inline std::string make_bird_root(const TempDir& dir) {
  std::string root = dir.file("bird");
  std::filesystem::create_directories(root + "/dev_databases/shop");
  make_shop_db(root + "/dev_databases/shop/shop.sqlite");
  write_text_file(
      root + "/dev.json",
      R"([
 {"question_id": 10, "db_id": "shop", "question": "Which items cost more than 1.9?",
  "evidence": "price is items.price", "SQL": "SELECT name FROM items WHERE price > 1.9",
  "difficulty": "simple"},
 {"question_id": 11, "db_id": "shop", "question": "How many items are there?",
  "evidence": "", "SQL": "SELECT COUNT(*) FROM items", "difficulty": "simple"},
 {"question_id": 12, "db_id": "shop", "question": "Total quantity sold?",
  "evidence": "", "SQL": "SELECT SUM(qty) FROM sales", "difficulty": "moderate"},
 {"question_id": 13, "db_id": "shop", "question": "Item names from cheapest to priciest.",
  "evidence": "", "SQL": "SELECT name FROM items ORDER BY price", "difficulty": "moderate"},
 {"question_id": 14, "db_id": "shop", "question": "Names of items with recorded sales.",
  "evidence": "join on id",
  "SQL": "SELECT DISTINCT name FROM items JOIN sales ON items.id = sales.item_id",
  "difficulty": "challenging"},
 {"question_id": 15, "db_id": "shop", "question": "Quantity sold per item name?",
  "evidence": "",
  "SQL": "SELECT name, SUM(qty) FROM items JOIN sales ON items.id = sales.item_id GROUP BY name",
  "difficulty": "challenging"}
])");
  return root;
}

inline Gateway make_synthetic_gateway(GatewayOptions options = {}) {
  return Gateway(std::make_shared<SyntheticBackend>(), PromptLibrary(),
                 default_role_configs("synthetic"), options);
}

inline Gateway make_scripted_gateway(const std::string& scenario_json,
                                     GatewayOptions options = {}) {
  return Gateway(ScriptedBackend::from_json_text(scenario_json), PromptLibrary(),
                 default_role_configs("scripted"), options);
}

}  // namespace evosql::testing
