#include "evosql/voting.hpp"

#include "evosql/errors.hpp"
#include "evosql/util.hpp"

namespace evosql {

double reward(double s, double t, double k) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(s) || !in_unit(t) || !in_unit(k))
    throw Error(ErrorKind::DomainError, "reward inputs must lie in [0,1]");
  return s * (1.0 - t) * k;
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  std::string n = to_lower(trim(name));
  if (n == "sum_of_rewards" || n == "sum") return Strategy::SumOfRewards;
  if (n == "majority") return Strategy::Majority;
  if (n == "highest_reward" || n == "max") return Strategy::HighestReward;
  if (n == "highest_avg_reward" || n == "mean") return Strategy::HighestAvgReward;
  return std::nullopt;
}

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::SumOfRewards: return "sum_of_rewards";
    case Strategy::Majority: return "majority";
    case Strategy::HighestReward: return "highest_reward";
    case Strategy::HighestAvgReward: return "highest_avg_reward";
  }
  return "?";
}

Selection select_query(const Buffer& buffer, Strategy strategy) {
  if (buffer.empty()) throw Error(ErrorKind::NoCandidates, "empty buffer");

  VoteTally tally;
  tally.strategy = strategy;
  for (const auto& entry : buffer) {
    KeyAggregate& agg = tally.per_key[entry.output];
    agg.sum += entry.reward;
    if (agg.count == 0 || entry.reward > agg.max) {
      agg.max = entry.reward;
    }
    agg.count += 1;
  }
  for (auto& [key, agg] : tally.per_key) {
    agg.mean = agg.sum / static_cast<double>(agg.count);
    agg.representative_sql = representative_query(buffer, key);
  }

  auto score = [&](const KeyAggregate& agg) {
    switch (strategy) {
      case Strategy::SumOfRewards: return agg.sum;
      case Strategy::Majority: return static_cast<double>(agg.count);
      case Strategy::HighestReward: return agg.max;
      case Strategy::HighestAvgReward: return agg.mean;
    }
    return 0.0;
  };

  const OutputKey* best = nullptr;
  double best_score = 0.0, best_max = 0.0;
  for (const auto& [key, agg] : tally.per_key) {
    double s = score(agg);
    // map iteration is in ascending key order, so on full ties the
    // lexicographically smaller key is kept.
    if (!best || s > best_score || (s == best_score && agg.max > best_max)) {
      best = &key;
      best_score = s;
      best_max = agg.max;
    }
  }
  tally.winner = *best;
  return Selection{tally.per_key.at(*best).representative_sql, std::move(tally)};
}

std::string representative_query(const Buffer& buffer, const OutputKey& key) {
  const BufferEntry* best = nullptr;
  for (const auto& entry : buffer) {
    if (!(entry.output == key)) continue;
    if (!best || entry.reward > best->reward) best = &entry;  // earliest wins ties
  }
  if (!best) throw Error(ErrorKind::KeyAbsent, "no buffer entry with the given output key");
  return best->sql;
}

}  // namespace evosql
