#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evosql/gateway.hpp"
#include "evosql/schema.hpp"

namespace evosql {

enum class SamplingRegime { PoolOfSeeds, SingleSeedRandomOrder, SingleSeedFixedOrder };

const char* regime_name(SamplingRegime regime);

// |distinct canonical forms| / |queries|. Throws EmptyPool on an empty list.
double uniqueness_ratio(const std::vector<std::string>& queries);

struct DiversityCell {
  SamplingRegime regime = SamplingRegime::PoolOfSeeds;
  double temperature = 0.0;
  double mean_ratio = 0.0;  // averaged over non-skipped tasks
  size_t task_count = 0;
  int n = 0;  // samples per task per regime
};

struct DiversityTask {
  Task task;
  FullSchema schema;
};

struct DiversityOptions {
  int n = 20;
  std::vector<double> temperatures = {0.0, 0.3, 0.7, 1.0};
  int attempts_factor = 10;  // subset proposals tried per task: attempts_factor * n
  int concurrency = 4;
};

struct DiversityOutcome {
  std::vector<DiversityCell> cells;  // temperature-major, regime order as declared
  size_t skipped_tasks = 0;          // tasks without n unique subsets
};

// Per task: collect n unique schema subsets (the pool; fewer than n within
// the attempt bound skips the task with InsufficientSubsets counted), and
// their merged superset. pool_of_seeds generates one query per pool subset;
// the single-seed regimes generate n queries from the superset, with a fresh
// render permutation per call (random order) or the declaration order (fixed
// order). Every generation overrides the gen_query temperature with the
// cell's value. Deterministic given a deterministic backend and seed.
DiversityOutcome run_comparison(const std::vector<DiversityTask>& tasks, Gateway& gateway,
                                const DiversityOptions& options, uint64_t seed);

// Fabricated tasks for backend-free experiments: small multi-table schemas
// with identifier-only names, plus a placeholder question. Deterministic in
// (count, seed).
std::vector<DiversityTask> synthetic_diversity_tasks(int count, uint64_t seed);

std::string render_diversity_csv(const DiversityOutcome& outcome);
std::string render_diversity_text(const DiversityOutcome& outcome);

}  // namespace evosql
