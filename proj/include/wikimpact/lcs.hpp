#pragma once

// Longest-common-subsequence engine over interned token sequences.
//
// The common prefix and common suffix are always matched; the remaining
// middle parts are compared with Hyyro's bit-parallel recurrence, which
// needs (|a| * |b|) / 64 word operations.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wikimpact::lcs {

using Symbol = std::uint32_t;

std::size_t length(std::span<const Symbol> a, std::span<const Symbol> b);

/// Marks which tokens of `newer` the pinned alignment matches (1) and which
/// it leaves unmatched (0). The pinned alignment matches the common prefix and
/// suffix; in between it takes, among all maximum alignments, the one whose
/// list of matched `newer` indices is lexicographically smallest.
std::vector<char> matched_in_newer(std::span<const Symbol> older, std::span<const Symbol> newer);

/// Upper bound on the bytes of row storage used by matched_in_newer before it
/// switches to checkpointed recomputation. Exposed for tests.
inline constexpr std::size_t kFullRowBudgetBytes = 64u << 20;

namespace detail {
/// matched_in_newer with an explicit row budget.
std::vector<char> matched_in_newer(std::span<const Symbol> older, std::span<const Symbol> newer,
                                   std::size_t row_budget_bytes);
}  // namespace detail

}  // namespace wikimpact::lcs
