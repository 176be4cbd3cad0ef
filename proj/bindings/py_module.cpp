#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evosql/backends.hpp"
#include "evosql/config.hpp"
#include "evosql/diversity.hpp"
#include "evosql/errors.hpp"
#include "evosql/eval.hpp"
#include "evosql/executor.hpp"
#include "evosql/schema.hpp"
#include "evosql/search.hpp"
#include "evosql/sqltext.hpp"
#include "evosql/util.hpp"
#include "evosql/voting.hpp"

namespace py = pybind11;

namespace {

evosql::Row row_from_python(const py::sequence& cells) {
  evosql::Row row;
  for (const auto& cell : cells) {
    if (cell.is_none()) {
      row.emplace_back(std::monostate{});
    } else if (py::isinstance<py::bool_>(cell)) {
      row.emplace_back(static_cast<int64_t>(cell.cast<bool>()));
    } else if (py::isinstance<py::int_>(cell)) {
      row.emplace_back(cell.cast<int64_t>());
    } else if (py::isinstance<py::float_>(cell)) {
      row.emplace_back(cell.cast<double>());
    } else {
      row.emplace_back(cell.cast<std::string>());
    }
  }
  return row;
}

std::vector<evosql::Row> rows_from_python(const py::sequence& rows) {
  std::vector<evosql::Row> out;
  for (const auto& row : rows) out.push_back(row_from_python(row.cast<py::sequence>()));
  return out;
}

py::object value_to_python(const evosql::Value& value) {
  if (std::holds_alternative<std::monostate>(value)) return py::none();
  if (std::holds_alternative<int64_t>(value)) return py::int_(std::get<int64_t>(value));
  if (std::holds_alternative<double>(value)) return py::float_(std::get<double>(value));
  return py::str(std::get<std::string>(value));
}

py::dict result_to_python(const evosql::ExecutionResult& result) {
  py::dict out;
  out["ok"] = result.ok();
  out["error"] = result.ok() ? py::object(py::none()) : py::str(result.error->message);
  out["columns"] = result.column_names;
  py::list rows;
  for (const auto& row : result.rows) {
    py::list cells;
    for (const auto& value : row) cells.append(value_to_python(value));
    rows.append(std::move(cells));
  }
  out["rows"] = std::move(rows);
  out["truncated"] = result.truncated;
  return out;
}

evosql::ExecLimits limits_of(int timeout_ms, size_t max_rows) {
  evosql::ExecLimits limits;
  limits.timeout = std::chrono::milliseconds(timeout_ms);
  limits.max_rows = max_rows;
  return limits;
}

}  // namespace

PYBIND11_MODULE(_evosql, m) {
  m.doc() = "SQL candidate search: canonicalization, execution, voting, and the task pipeline";

  py::register_exception<evosql::Error>(m, "EvosqlError");

  m.def("canonicalize_sql", &evosql::canonicalize_sql, py::arg("sql"));
  m.def("extract_select_statement", &evosql::extract_select_statement, py::arg("raw"));
  m.def("has_toplevel_order_by", &evosql::has_toplevel_order_by, py::arg("sql"));
  m.def("reward", &evosql::reward, py::arg("s"), py::arg("t"), py::arg("k"));
  m.def("depth_limit", &evosql::depth_limit, py::arg("difficulty"));

  m.def(
      "execute",
      [](const std::string& sql, const std::string& db_path, int timeout_ms, size_t max_rows) {
        return result_to_python(evosql::execute(sql, db_path, limits_of(timeout_ms, max_rows)));
      },
      py::arg("sql"), py::arg("db_path"), py::arg("timeout_ms") = 30000,
      py::arg("max_rows") = 10000);

  m.def(
      "query_key",
      [](const std::string& sql, const std::string& db_path, int timeout_ms, size_t max_rows) {
        auto result = evosql::execute(sql, db_path, limits_of(timeout_ms, max_rows));
        return evosql::output_key(result, evosql::has_toplevel_order_by(sql)).value;
      },
      py::arg("sql"), py::arg("db_path"), py::arg("timeout_ms") = 30000,
      py::arg("max_rows") = 10000);

  m.def(
      "soft_f1",
      [](const py::sequence& pred_rows, const py::sequence& gold_rows) {
        return evosql::soft_f1(rows_from_python(pred_rows), rows_from_python(gold_rows));
      },
      py::arg("pred_rows"), py::arg("gold_rows"));

  m.def(
      "execution_accuracy",
      [](const std::string& pred_sql, const std::string& gold_sql, const std::string& db_path) {
        return evosql::execution_accuracy(pred_sql, gold_sql, db_path);
      },
      py::arg("pred_sql"), py::arg("gold_sql"), py::arg("db_path"));

  m.def(
      "load_schema",
      [](const std::string& db_path) {
        evosql::FullSchema schema = evosql::load_schema(db_path);
        py::dict out;
        out["db_id"] = schema.db_id;
        py::list tables;
        for (const auto& table : schema.tables) {
          py::dict t;
          t["name"] = table.name;
          py::list columns;
          for (const auto& column : table.columns) {
            py::dict c;
            c["name"] = column.name;
            c["datatype"] = column.datatype;
            c["examples"] = column.example_values;
            columns.append(std::move(c));
          }
          t["columns"] = std::move(columns);
          tables.append(std::move(t));
        }
        out["tables"] = std::move(tables);
        return out;
      },
      py::arg("db_path"));

  m.def(
      "fingerprint",
      [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        return evosql::fingerprint(std::set<evosql::SchemaPair>(pairs.begin(), pairs.end()));
      },
      py::arg("pairs"));

  m.def(
      "select_query",
      [](const std::vector<std::tuple<std::string, double, std::string>>& entries,
         const std::string& strategy) {
        evosql::Buffer buffer;
        for (const auto& [sql, reward_value, key] : entries) {
          evosql::BufferEntry entry;
          entry.sql = sql;
          entry.reward = reward_value;
          entry.output.value = key;
          buffer.push_back(std::move(entry));
        }
        auto parsed = evosql::parse_strategy(strategy);
        if (!parsed) throw evosql::Error(evosql::ErrorKind::ConfigError, "unknown strategy");
        auto selection = evosql::select_query(buffer, *parsed);
        return py::make_tuple(selection.sql, selection.tally.winner.value);
      },
      py::arg("entries"), py::arg("strategy") = "sum_of_rewards");

  m.def("uniqueness_ratio", &evosql::uniqueness_ratio, py::arg("queries"));

  m.def(
      "solve",
      [](const std::string& question, const std::string& db_path, const std::string& hint,
         uint64_t seed, int pool_samples, int concurrency) {
        evosql::Task task;
        task.question_id = 0;
        task.question = question;
        task.hint = hint;
        evosql::FullSchema schema = evosql::load_schema(db_path);
        task.db_id = schema.db_id;

        auto backend = std::make_shared<evosql::SyntheticBackend>();
        evosql::PromptLibrary prompts;
        evosql::Gateway gateway(backend, prompts,
                                evosql::default_role_configs("synthetic"), {});
        evosql::SearchOptions options;
        options.pool_samples = pool_samples;
        options.concurrency = concurrency;
        auto report = evosql::run_task(task, schema, db_path, options, gateway, seed);

        py::dict out;
        out["sql"] = report.chosen_sql ? py::object(py::str(*report.chosen_sql))
                                       : py::object(py::none());
        out["failure_reason"] = report.failure_reason;
        out["difficulty"] = report.difficulty;
        out["iterations"] = report.iterations;
        out["buffer_size"] = report.buffer.size();
        return out;
      },
      py::arg("question"), py::arg("db_path"), py::arg("hint") = "", py::arg("seed") = 1,
      py::arg("pool_samples") = 8, py::arg("concurrency") = 2,
      "Runs the full search pipeline against the database with the "
      "deterministic offline backend.");
}
