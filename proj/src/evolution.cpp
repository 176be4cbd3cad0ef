#include "evosql/evolution.hpp"

#include <algorithm>

#include "evosql/errors.hpp"

namespace evosql {

SeedPool seed_pool(const Task& task, const FullSchema& schema, int n, Gateway& gateway,
                   uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::DomainError, "seed_pool needs N >= 1");
  SeedPool pool;
  std::set<SchemaPair> all_pairs;
  size_t succeeded = 0;
  for (int i = 0; i < n; ++i) {
    SchemaSubset subset;
    try {
      subset = gateway.propose_subset(task, schema,
                                      mix_seed(seed, "subset", {static_cast<uint64_t>(i)}));
    } catch (const Error&) {
      continue;  // failed samples are skipped, not fatal
    }
    ++succeeded;
    all_pairs.insert(subset.pairs().begin(), subset.pairs().end());
    if (pool.observed.insert(subset.fingerprint()).second) pool.members.push_back(std::move(subset));
  }
  if (succeeded == 0)
    throw Error(ErrorKind::NoValidSubsets, "all " + std::to_string(n) + " proposals failed");

  SchemaSubset superset{std::move(all_pairs)};
  if (pool.observed.insert(superset.fingerprint()).second)
    pool.members.push_back(std::move(superset));
  return pool;
}

SchemaSubset crossover(const SchemaSubset& a, const SchemaSubset& b) {
  std::set<SchemaPair> pairs = a.pairs();
  pairs.insert(b.pairs().begin(), b.pairs().end());
  return SchemaSubset(std::move(pairs));
}

SchemaSubset mutate_subset(const SchemaSubset& s, const std::set<std::string>& observed,
                           Rng& rng) {
  if (s.empty()) throw Error(ErrorKind::DomainError, "cannot mutate an empty subset");
  std::vector<SchemaPair> pairs(s.pairs().begin(), s.pairs().end());
  while (true) {
    pairs.erase(pairs.begin() + static_cast<ptrdiff_t>(rng.below(pairs.size())));
    if (pairs.empty())
      throw Error(ErrorKind::ExhaustedMutations, "every strict subset was already observed");
    SchemaSubset candidate{std::set<SchemaPair>(pairs.begin(), pairs.end())};
    if (observed.count(candidate.fingerprint()) == 0) return candidate;
  }
}

SeedPool evolve_pool(const SeedPool& pool, double p, Rng& rng) {
  if (pool.size() < 2) throw Error(ErrorKind::DomainError, "evolution needs at least 2 members");
  if (p < 0.0 || p > 1.0) throw Error(ErrorKind::DomainError, "crossover probability outside [0,1]");

  const size_t n = pool.size();
  const size_t attempt_bound = 50 * n;
  SeedPool next;
  next.observed = pool.observed;
  std::set<std::string> in_next;
  size_t attempts = 0;

  while (next.members.size() < n) {
    if (++attempts > attempt_bound)
      throw Error(ErrorKind::EvolutionStalled,
                  "could not fill the pool in " + std::to_string(attempt_bound) + " attempts");

    SchemaSubset child;
    if (rng.unit() < p) {
      size_t i = static_cast<size_t>(rng.below(n));
      size_t j = static_cast<size_t>(rng.below(n - 1));
      if (j >= i) ++j;
      child = crossover(pool.members[i], pool.members[j]);
    } else {
      const SchemaSubset& parent = pool.members[static_cast<size_t>(rng.below(n))];
      try {
        child = mutate_subset(parent, next.observed, rng);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::ExhaustedMutations) continue;
        throw;
      }
    }

    if (!in_next.insert(child.fingerprint()).second) continue;
    next.observed.insert(child.fingerprint());
    next.members.push_back(std::move(child));
  }
  return next;
}

}  // namespace evosql
