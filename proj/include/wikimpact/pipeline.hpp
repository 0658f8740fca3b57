#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wikimpact/filters.hpp"
#include "wikimpact/measures.hpp"
#include "wikimpact/page_parser.hpp"
#include "wikimpact/pageviews.hpp"
#include "wikimpact/scores.hpp"

namespace wikimpact {

enum class OutputFormat { Console, Csv, Json };

struct RunConfig {
  std::filesystem::path dump_path;
  std::optional<std::filesystem::path> pageview_path;
  std::optional<std::string> project_tag;
  /// Measures computed in the same pass, reported in this order.
  std::vector<Measure> measures = {Measure::NumEdits};
  std::size_t judges = kDefaultJudges;
  ParserConfig parser;
  std::vector<PostFilter> postfilters;
  std::size_t parallelism = 1;
  OutputFormat output_format = OutputFormat::Console;
  bool drop_zero = false;
  bool drop_anonymous = false;
  bool pageview_weighting = false;
};

/// Throws ConfigError when the configuration is inconsistent.
void validate(const RunConfig& config);

struct RunReport {
  /// Distinct page records that entered the parse stage.
  std::size_t pages_parsed = 0;
  /// Records dropped before scoring; the sum of the four counters below.
  std::size_t pages_filtered = 0;
  std::size_t pages_prefiltered = 0;
  std::size_t pages_redirect_excluded = 0;
  std::size_t pages_postfiltered = 0;
  std::size_t pages_malformed = 0;
  /// Pages that reached the measures.
  std::size_t pages_measured = 0;
  std::size_t revisions_retained = 0;
  std::size_t duplicate_records = 0;
  std::size_t prefilter_errors = 0;
  PageviewStats pageview_stats;
  std::size_t pages_with_views = 0;
  std::vector<std::string> warnings;
};

struct MeasureRanking {
  Measure measure = Measure::NumEdits;
  std::vector<RankedScore> ranking;
};

struct RunResult {
  std::vector<MeasureRanking> rankings;
  RunReport report;
};

/// Decompress, split, dedup, parse, filter, optionally join pageviews, score,
/// reduce and rank. Results do not depend on `parallelism`.
RunResult run_ranking(const RunConfig& config);

struct CountResult {
  std::size_t pages = 0;
  std::size_t revisions = 0;
  RunReport report;
};

/// The parse and filter stages of run_ranking without scoring.
CountResult run_count(const std::filesystem::path& dump, const ParserConfig& parser,
                      const std::vector<PostFilter>& postfilters = {}, std::size_t parallelism = 1);

struct ParserCheckResult {
  bool pass = true;
  /// Smallest revision id produced by only one variant.
  std::optional<std::uint64_t> first_divergent;
  std::size_t event_xml_revisions = 0;
  std::size_t regex_lines_revisions = 0;
  std::size_t only_event_xml = 0;
  std::size_t only_regex_lines = 0;
};

ParserCheckResult run_parser_check(const std::filesystem::path& dump, const std::vector<PreFilter>& prefilters = {},
                                   std::shared_ptr<const RegexTable> regex_table = nullptr,
                                   std::size_t parallelism = 1);

}  // namespace wikimpact
