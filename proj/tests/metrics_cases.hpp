#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evosql/executor.hpp"

namespace evosql::testing {

struct MetricsCase {
  std::string label;
  std::vector<Row> pred;
  std::vector<Row> gold;
  double expected;  // compare at 1e-12
};

inline Value I(int64_t v) { return Value{v}; }
inline Value D(double v) { return Value{v}; }
inline Value S(const char* v) { return Value{std::string(v)}; }
inline Value N() { return Value{std::monostate{}}; }

// Hand-computed soft-F1 values. Each expected value follows the published
// formula: greedy row matching by cell-multiset overlap, per-pair width
// denominator max(|p|, |g|), unmatched rows counting as whole false
// positives/negatives.
inline std::vector<MetricsCase> soft_f1_cases() {
  std::vector<MetricsCase> cases;
  auto add = [&](std::string label, std::vector<Row> pred, std::vector<Row> gold,
                 double expected) {
    cases.push_back({std::move(label), std::move(pred), std::move(gold), expected});
  };

  add("exact_single", {{I(1)}}, {{I(1)}}, 1.0);
  add("disjoint_single", {{I(1)}}, {{I(2)}}, 0.0);
  add("both_empty", {}, {}, 1.0);
  add("pred_empty", {}, {{I(1)}}, 0.0);
  add("gold_empty", {{I(1)}}, {}, 0.0);
  // tp=1, fp=1: one pred row has no gold partner left
  add("extra_duplicate_pred", {{I(1)}, {I(1)}}, {{I(1)}}, 2.0 / 3.0);
  // tp=2, fn=1: 4/5
  add("missing_duplicate_gold", {{I(1)}, {I(1)}}, {{I(1)}, {I(1)}, {I(1)}}, 0.8);
  // o=1 over width 2: tp=fp=fn=1/2
  add("half_cell_overlap", {{I(1), I(2)}}, {{I(1), I(3)}}, 0.5);
  // o=1, denom=2: tp=1/2, fn=1/2
  add("narrow_pred", {{I(1)}}, {{I(1), I(2)}}, 2.0 / 3.0);
  add("row_order_free", {{I(2)}, {I(1)}}, {{I(1)}, {I(2)}}, 1.0);
  add("cell_order_free", {{I(1), I(2)}}, {{I(2), I(1)}}, 1.0);
  add("int_double_unify", {{I(1)}}, {{D(1.0)}}, 1.0);
  add("six_decimal_rounding", {{D(0.1234564)}}, {{D(0.1234559)}}, 1.0);
  add("negative_zero_folds", {{D(-0.0)}}, {{I(0)}}, 1.0);
  add("text_rtrim", {{S("a  ")}}, {{S("a")}}, 1.0);
  add("text_leading_space_distinct", {{S(" a")}}, {{S("a")}}, 0.0);
  add("null_matches_null", {{N()}}, {{N()}}, 1.0);
  add("null_not_zero", {{N()}}, {{I(0)}}, 0.0);
  add("null_not_text_z", {{S("z")}}, {{N()}}, 0.0);
  add("int_not_text", {{I(1)}}, {{S("1")}}, 0.0);
  // one full row match, one disjoint pair: tp=1, fp=1, fn=1
  add("one_of_two_rows", {{I(1), I(2)}, {I(3), I(4)}}, {{I(1), I(2)}, {I(5), I(6)}}, 0.5);
  // the o=2 partner wins over the o=1 one; the loser is a whole fn
  add("greedy_prefers_larger_overlap", {{I(1), I(2)}}, {{I(2), I(9)}, {I(1), I(2)}}, 2.0 / 3.0);
  // duplicate cell inside one row: o=min(2,1)=1, denom=2
  add("within_row_duplicates", {{I(1), I(1)}}, {{I(1)}}, 2.0 / 3.0);
  // per-cell min counts: o=2 of width 3
  add("multiset_counts", {{I(1), I(1), I(2)}}, {{I(1), I(2), I(2)}},
      2.0 * (2.0 / 3.0) / (2.0 * (2.0 / 3.0) + 1.0 / 3.0 + 1.0 / 3.0));
  // tp=1, fp=2
  add("extra_pred_rows", {{I(1)}, {I(2)}, {I(3)}}, {{I(1)}}, 0.5);

  return cases;
}

}  // namespace evosql::testing
