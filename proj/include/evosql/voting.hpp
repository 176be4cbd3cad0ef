#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evosql/executor.hpp"

namespace evosql {

struct CritiqueScores {
  double score = 0.0;         // s
  double confidence = 0.0;    // k
  double temperature = 0.0;   // t (mutation temperature)
};

// One voting-substrate record: a successfully executed candidate with its
// reward and canonical output identity.
struct BufferEntry {
  std::string sql;
  double reward = 0.0;
  OutputKey output;
  CritiqueScores critique;
  std::vector<std::string> preview_rows;  // capped display rows
  int chain_id = -1;
  int depth = 0;
  int iteration = 0;
};

using Buffer = std::vector<BufferEntry>;

// R = s * (1 - t) * k. All inputs must lie in [0, 1]; throws DomainError
// otherwise.
double reward(double s, double t, double k);

enum class Strategy { SumOfRewards, Majority, HighestReward, HighestAvgReward };

std::optional<Strategy> parse_strategy(const std::string& name);
const char* strategy_name(Strategy strategy);

struct KeyAggregate {
  double sum = 0.0;
  double max = 0.0;
  double mean = 0.0;
  size_t count = 0;
  std::string representative_sql;  // highest reward, earliest on ties
};

struct VoteTally {
  std::map<OutputKey, KeyAggregate> per_key;
  OutputKey winner;
  Strategy strategy = Strategy::SumOfRewards;
};

struct Selection {
  std::string sql;
  VoteTally tally;
};

// Groups the buffer by output key and picks the winner under `strategy`.
// Ties across keys break by higher max reward, then lexicographically
// smaller key. Throws NoCandidates on an empty buffer.
Selection select_query(const Buffer& buffer, Strategy strategy);

// The highest-reward entry recorded under `key`; ties break by earliest
// insertion order. Throws KeyAbsent when no entry carries the key.
std::string representative_query(const Buffer& buffer, const OutputKey& key);

}  // namespace evosql
