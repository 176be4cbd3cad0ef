#include "evosql/diversity.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <set>
#include <sstream>

#include "evosql/errors.hpp"
#include "evosql/sqltext.hpp"
#include "evosql/util.hpp"

namespace evosql {

const char* regime_name(SamplingRegime regime) {
  switch (regime) {
    case SamplingRegime::PoolOfSeeds: return "pool_of_seeds";
    case SamplingRegime::SingleSeedRandomOrder: return "single_seed_random_order";
    case SamplingRegime::SingleSeedFixedOrder: return "single_seed_fixed_order";
  }
  return "?";
}

double uniqueness_ratio(const std::vector<std::string>& queries) {
  if (queries.empty()) throw Error(ErrorKind::EmptyPool, "no queries to measure");
  std::set<std::string> distinct;
  for (const auto& q : queries) distinct.insert(canonicalize_sql(q));
  return static_cast<double>(distinct.size()) / static_cast<double>(queries.size());
}

namespace {

constexpr size_t kRegimes = 3;

struct CellCount {
  size_t unique = 0;
  size_t total = 0;
};

struct TaskOutcome {
  bool skipped = false;
  // counts[temp_index][regime]
  std::vector<std::array<CellCount, kRegimes>> counts;
};

// Throws InsufficientSubsets when the task cannot supply n unique subsets
// (or a regime ends up with zero usable generations).
TaskOutcome measure_task(const DiversityTask& dt, Gateway& gateway,
                         const DiversityOptions& options, uint64_t seed, uint64_t task_index) {
  TaskOutcome outcome;
  const int n = options.n;

  std::vector<SchemaSubset> pool;
  std::set<std::string> fingerprints;
  const int attempt_bound = options.attempts_factor * n;
  for (int attempt = 0; attempt < attempt_bound && pool.size() < static_cast<size_t>(n);
       ++attempt) {
    try {
      SchemaSubset subset = gateway.propose_subset(
          dt.task, dt.schema,
          mix_seed(seed, "div_subset", {task_index, static_cast<uint64_t>(attempt)}));
      if (fingerprints.insert(subset.fingerprint()).second) pool.push_back(std::move(subset));
    } catch (const Error&) {
      // a failed proposal just consumes an attempt
    }
  }
  if (pool.size() < static_cast<size_t>(n))
    throw Error(ErrorKind::InsufficientSubsets,
                "task " + std::to_string(task_index) + " yielded " +
                    std::to_string(pool.size()) + " unique subsets, needed " + std::to_string(n));

  std::set<SchemaPair> merged;
  for (const auto& subset : pool) merged.insert(subset.pairs().begin(), subset.pairs().end());
  SchemaSubset superset{std::move(merged)};

  for (size_t ti = 0; ti < options.temperatures.size(); ++ti) {
    double temp = options.temperatures[ti];
    std::array<std::vector<std::string>, kRegimes> queries;
    for (int i = 0; i < n; ++i) {
      for (size_t regime = 0; regime < kRegimes; ++regime) {
        const SchemaSubset& source =
            regime == static_cast<size_t>(SamplingRegime::PoolOfSeeds) ? pool[static_cast<size_t>(i)]
                                                                       : superset;
        std::optional<uint64_t> render_seed;
        if (regime == static_cast<size_t>(SamplingRegime::SingleSeedRandomOrder))
          render_seed = mix_seed(seed, "div_render", {task_index, ti, static_cast<uint64_t>(i)});
        try {
          queries[regime].push_back(gateway.generate_query(
              dt.task, source, dt.schema,
              mix_seed(seed, "div_gen", {task_index, ti, regime, static_cast<uint64_t>(i)}), temp,
              render_seed));
        } catch (const Error&) {
          // unusable generations shrink this regime's sample
        }
      }
    }
    std::array<CellCount, kRegimes> row{};
    for (size_t regime = 0; regime < kRegimes; ++regime) {
      if (queries[regime].empty())
        throw Error(ErrorKind::InsufficientSubsets,
                    std::string(regime_name(static_cast<SamplingRegime>(regime))) +
                        " produced no usable generations");
      std::set<std::string> distinct;
      for (const auto& q : queries[regime]) distinct.insert(canonicalize_sql(q));
      row[regime] = {distinct.size(), queries[regime].size()};
    }
    outcome.counts.push_back(row);
  }
  return outcome;
}

}  // namespace

DiversityOutcome run_comparison(const std::vector<DiversityTask>& tasks, Gateway& gateway,
                                const DiversityOptions& options, uint64_t seed) {
  if (options.n < 2) throw Error(ErrorKind::DomainError, "diversity needs N >= 2");

  std::vector<TaskOutcome> outcomes(tasks.size());
  const size_t width = options.concurrency < 1 ? 1 : static_cast<size_t>(options.concurrency);
  for (size_t base = 0; base < tasks.size(); base += width) {
    size_t count = std::min(width, tasks.size() - base);
    std::vector<std::future<TaskOutcome>> wave;
    for (size_t i = 0; i < count; ++i) {
      size_t idx = base + i;
      wave.push_back(std::async(std::launch::async, [&, idx]() -> TaskOutcome {
        try {
          return measure_task(tasks[idx], gateway, options, seed, static_cast<uint64_t>(idx));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::InsufficientSubsets) throw;
          TaskOutcome skipped;
          skipped.skipped = true;
          return skipped;
        }
      }));
    }
    for (size_t i = 0; i < count; ++i) outcomes[base + i] = wave[i].get();
  }

  DiversityOutcome result;
  size_t included = 0;
  // per cell: integer sums plus a flag for a shared denominator. When every
  // task sampled the same count the mean of ratios is sum_unique/(tasks*count),
  // a single exact division; otherwise fall back to averaging the doubles.
  struct CellSum {
    uint64_t unique = 0;
    size_t shared_total = 0;
    bool common = true;
    double ratio_sum = 0.0;
  };
  std::vector<std::array<CellSum, kRegimes>> sums(options.temperatures.size());
  for (const auto& outcome : outcomes) {
    if (outcome.skipped) {
      ++result.skipped_tasks;
      continue;
    }
    ++included;
    for (size_t ti = 0; ti < options.temperatures.size(); ++ti) {
      for (size_t regime = 0; regime < kRegimes; ++regime) {
        const CellCount& count = outcome.counts[ti][regime];
        CellSum& sum = sums[ti][regime];
        if (included == 1)
          sum.shared_total = count.total;
        else if (count.total != sum.shared_total)
          sum.common = false;
        sum.unique += count.unique;
        sum.ratio_sum += static_cast<double>(count.unique) / static_cast<double>(count.total);
      }
    }
  }

  for (size_t ti = 0; ti < options.temperatures.size(); ++ti) {
    for (size_t regime = 0; regime < kRegimes; ++regime) {
      const CellSum& sum = sums[ti][regime];
      DiversityCell cell;
      cell.regime = static_cast<SamplingRegime>(regime);
      cell.temperature = options.temperatures[ti];
      if (included == 0)
        cell.mean_ratio = 0.0;
      else if (sum.common)
        cell.mean_ratio = static_cast<double>(sum.unique) /
                          static_cast<double>(included * sum.shared_total);
      else
        cell.mean_ratio = sum.ratio_sum / static_cast<double>(included);
      cell.task_count = included;
      cell.n = options.n;
      result.cells.push_back(cell);
    }
  }
  return result;
}

std::vector<DiversityTask> synthetic_diversity_tasks(int count, uint64_t seed) {
  std::vector<DiversityTask> tasks;
  static const char* kTypes[] = {"INTEGER", "TEXT", "REAL"};
  for (int i = 0; i < count; ++i) {
    Rng rng(mix_seed(seed, "fixture", {static_cast<uint64_t>(i)}));
    size_t table_count = 2 + static_cast<size_t>(rng.below(2));
    size_t column_count = 9 + static_cast<size_t>(rng.below(4));

    DiversityTask dt;
    dt.schema.db_id = "synthetic_" + std::to_string(i);
    for (size_t t = 0; t < table_count; ++t) {
      TableDef table;
      table.name = "t" + std::to_string(i) + "_" + std::to_string(t);
      dt.schema.tables.push_back(std::move(table));
    }
    for (size_t c = 0; c < column_count; ++c) {
      ColumnDef column;
      column.name = "c" + std::to_string(c);
      column.datatype = kTypes[c % 3];
      column.example_values = {"1", "2", "3"};
      dt.schema.tables[c % table_count].columns.push_back(std::move(column));
    }

    dt.task.question_id = i;
    dt.task.db_id = dt.schema.db_id;
    dt.task.question = "Report the values of interest for case " + std::to_string(i) + ".";
    tasks.push_back(std::move(dt));
  }
  return tasks;
}

std::string render_diversity_csv(const DiversityOutcome& outcome) {
  std::ostringstream out;
  out << "temperature,regime,mean_uniqueness_pct,tasks,n\n";
  for (const auto& cell : outcome.cells) {
    char line[160];
    std::snprintf(line, sizeof(line), "%.2f,%s,%.2f,%zu,%d\n", cell.temperature,
                  regime_name(cell.regime), 100.0 * cell.mean_ratio, cell.task_count, cell.n);
    out << line;
  }
  return out.str();
}

std::string render_diversity_text(const DiversityOutcome& outcome) {
  std::set<double> temps;
  for (const auto& cell : outcome.cells) temps.insert(cell.temperature);

  std::ostringstream out;
  out << "mean unique-query percentage by regime and temperature\n";
  char head[256];
  std::snprintf(head, sizeof(head), "%-26s", "regime");
  out << head;
  for (double t : temps) {
    std::snprintf(head, sizeof(head), "  t=%-6.2f", t);
    out << head;
  }
  out << "\n";
  for (size_t regime = 0; regime < kRegimes; ++regime) {
    std::snprintf(head, sizeof(head), "%-26s", regime_name(static_cast<SamplingRegime>(regime)));
    out << head;
    for (double t : temps) {
      for (const auto& cell : outcome.cells) {
        if (static_cast<size_t>(cell.regime) == regime && cell.temperature == t) {
          std::snprintf(head, sizeof(head), "  %-8.2f", 100.0 * cell.mean_ratio);
          out << head;
        }
      }
    }
    out << "\n";
  }
  if (outcome.skipped_tasks > 0) out << "tasks skipped (insufficient subsets): " << outcome.skipped_tasks << "\n";
  return out.str();
}

}  // namespace evosql
