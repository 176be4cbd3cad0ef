#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "evosql/gateway.hpp"
#include "evosql/schema.hpp"
#include "evosql/util.hpp"

namespace evosql {

// The working population of schema subsets. Members stay deduplicated by
// fingerprint and nonempty; `observed` covers every fingerprint this task has
// ever seen, so mutation can enforce novelty across rounds.
struct SeedPool {
  std::vector<SchemaSubset> members;  // insertion order, no duplicate fingerprints
  std::set<std::string> observed;     // superset of member fingerprints

  size_t size() const { return members.size(); }
};

// Samples gateway.propose_subset N times, keeps the unique subsets, and
// appends the union of everything sampled. Individual sample failures
// (hallucinated-only proposals, backend errors) are skipped; when all N fail,
// throws NoValidSubsets. Pool size is at most N+1.
SeedPool seed_pool(const Task& task, const FullSchema& schema, int n, Gateway& gateway,
                   uint64_t seed);

// Pair-set union of a and b.
SchemaSubset crossover(const SchemaSubset& a, const SchemaSubset& b);

// Removes pairs uniformly at random, one at a time, until the result's
// fingerprint is not in `observed`. The result is always a strict, nonempty
// subset of s. Throws ExhaustedMutations when the chain reaches the empty set
// with every intermediate already observed.
SchemaSubset mutate_subset(const SchemaSubset& s, const std::set<std::string>& observed, Rng& rng);

// One evolution round: builds P' with |P'| = |P|, each member produced by
// crossover with probability p (parents uniform, without replacement) or by
// mutate_subset otherwise. Duplicates within P' are rejected and redrawn;
// after 50*|P| failed attempts throws EvolutionStalled (callers fall back to
// reusing P). The observed set carries forward, extended with the new
// members.
SeedPool evolve_pool(const SeedPool& pool, double p, Rng& rng);

}  // namespace evosql
