#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wikimpact/model.hpp"

namespace wikimpact {

enum class ArithOp { Add, Sub, Mul, Div };
enum class AggregateKind { Min, Max, Sum };

/// Inner join on subject_id; unmatched subjects are omitted. The label comes
/// from `a`. Output is sorted by subject_id. Throws DivisionByZero naming the
/// first subject (ascending id) whose divisor is 0.
std::vector<RelevanceScore> join_op(const std::vector<RelevanceScore>& a, const std::vector<RelevanceScore>& b,
                                    ArithOp op);

/// Applies `op` with `alpha` to every score, preserving order. Throws
/// DivisionByZero for division by 0.
std::vector<RelevanceScore> scalar_op(std::vector<RelevanceScore> a, double alpha, ArithOp op);

/// Sum runs in ascending subject_id order. Throws EmptyCollection for
/// min/max of an empty collection; the sum of nothing is 0.
double aggregate(const std::vector<RelevanceScore>& a, AggregateKind kind);

struct RankedScore {
  std::size_t rank = 0;
  RelevanceScore score;

  bool operator==(const RankedScore&) const = default;
};

/// Sorts by descending score, then ascending subject_id, and numbers the
/// entries 1..n. `drop_anonymous` removes the subject whose id is the
/// identifier of the anonymous sentinel.
std::vector<RankedScore> rank(std::vector<RelevanceScore> a, bool drop_zero = false, bool drop_anonymous = false);

/// Largest i such that the i-th largest value is at least i.
std::size_t h_index(std::vector<std::uint64_t> citations);

/// Identifier shared by all anonymous contributors.
std::int64_t anonymous_subject_id() noexcept;

}  // namespace wikimpact
