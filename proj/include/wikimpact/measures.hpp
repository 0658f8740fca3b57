#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wikimpact/model.hpp"

namespace wikimpact {

using TokenSeq = std::vector<std::string>;

/// Splits on runs of Unicode White_Space characters; no empty tokens.
TokenSeq tokenize(std::string_view text);

struct WordDiff {
  std::size_t inserted = 0;
  std::size_t deleted = 0;
  /// Tokens of the newer sequence left unmatched by the pinned LCS alignment
  /// (see lcs::matched_in_newer), in order.
  std::vector<std::string> added_tokens;

  bool operator==(const WordDiff&) const = default;
};

/// inserted = |newer| - LCS, deleted = |older| - LCS.
WordDiff word_diff(const TokenSeq& older, const TokenSeq& newer);

/// max(inserted, deleted) of the word diff.
double edit_distance(const TokenSeq& a, const TokenSeq& b);

/// (d(prev, judge) - d(cur, judge)) / d(prev, cur), clamped to [-1, 1];
/// nullopt when d(prev, cur) is 0.
std::optional<double> edit_quality(const TokenSeq& prev, const TokenSeq& cur, const TokenSeq& judge);

/// Size of the multiset intersection of `added` and `future`.
std::size_t live_tokens(const std::vector<std::string>& added, const TokenSeq& future);

enum class Measure {
  NumEdits,
  TextOnly,
  EditOnly,
  TextLongevity,
  EditLongevity,
  TenRevisions,
  TextLongevityWithPenalty,
};

inline constexpr std::array<Measure, 7> kAllMeasures = {
    Measure::NumEdits,      Measure::TextOnly,      Measure::EditOnly,
    Measure::TextLongevity, Measure::EditLongevity, Measure::TenRevisions,
    Measure::TextLongevityWithPenalty,
};

/// Command-line name, e.g. "text-longevity".
std::string_view measure_name(Measure m);
/// Inverse of measure_name; throws ConfigError for unknown names.
Measure parse_measure(std::string_view name);

/// Number of judging revisions for the longevity measures.
inline constexpr std::size_t kDefaultJudges = 10;
/// TenRevisions always looks this many revisions ahead.
inline constexpr std::size_t kTenRevisionsLookahead = 10;

/// Score of one retained revision under one measure.
struct RevisionScore {
  std::uint64_t revision_id = 0;
  std::int64_t contributor_id = 0;
  /// Identity string of the contributor.
  std::string label;
  double score = 0.0;

  bool operator==(const RevisionScore&) const = default;
};

/// Scores every retained revision of `page`, in revision order. The page is
/// expected to be collapsed already. Throws ConfigError when `judges` is 0.
std::vector<RevisionScore> score_page(const Page& page, Measure measure, std::size_t judges = kDefaultJudges);

/// All seven measures at once, sharing tokenisation and diffs; indexed like
/// kAllMeasures.
std::array<std::vector<RevisionScore>, 7> score_page_all(const Page& page,
                                                         std::size_t judges = kDefaultJudges);

/// Multiplies each score by the page's request count (0 without pageview).
std::vector<RevisionScore> pageview_weighted(std::vector<RevisionScore> scores, const Page& page);

/// Sums scores per contributor_id. Summation runs in (contributor_id,
/// revision_id, score) order so the result does not depend on input order;
/// the label is the lexicographically smallest one seen for the id. Output is
/// sorted by subject_id.
std::vector<RelevanceScore> reduce_by_contributor(std::vector<RevisionScore> scores);

}  // namespace wikimpact
