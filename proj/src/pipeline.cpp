#include "wikimpact/pipeline.hpp"

#include <algorithm>
#include <iterator>

#include <spdlog/spdlog.h>

#include "wikimpact/decompress.hpp"
#include "wikimpact/error.hpp"
#include "wikimpact/page_splitter.hpp"
#include "wikimpact/parallel.hpp"

namespace wikimpact {
namespace {

constexpr std::size_t kBatchRecords = 256;
constexpr std::size_t kBatchBytes = std::size_t{64} << 20;

/// Streams distinct page records of `dump` in batches to `fn`.
template <typename Fn>
void for_each_batch(const std::filesystem::path& dump, std::size_t parallelism, RunReport& report, Fn fn) {
  auto source = open_decompressed(dump, parallelism);
  PageSplitter splitter;
  RecordDeduplicator dedup;
  std::vector<RawPageRecord> batch;
  std::size_t batch_bytes = 0;
  auto flush = [&] {
    if (batch.empty()) return;
    fn(batch);
    batch.clear();
    batch_bytes = 0;
  };
  while (auto chunk = source->next()) {
    splitter.feed(*chunk);
    while (auto rec = splitter.next()) {
      if (!dedup.first_occurrence(rec->xml)) continue;
      batch_bytes += rec->xml.size();
      batch.push_back(std::move(*rec));
      if (batch.size() >= kBatchRecords || batch_bytes >= kBatchBytes) flush();
    }
  }
  splitter.finish();
  flush();
  report.duplicate_records = dedup.duplicates();
}

enum class Outcome { Measured, Prefiltered, Redirect, Postfiltered, Malformed };

struct PageOutcome {
  Outcome outcome = Outcome::Measured;
  std::size_t revisions = 0;
  std::size_t prefilter_errors = 0;
  bool has_view = false;
  std::string warning;
  /// One score list per configured measure.
  std::vector<std::vector<RevisionScore>> scores;
};

class Stage {
 public:
  Stage(const ParserConfig& parser, const std::vector<PostFilter>& postfilters, const PageviewIndex* views)
      : parser_(parser), postfilters_(postfilters), views_(views) {}

  /// Parses and filters; `score` is called with the surviving page.
  template <typename Score>
  PageOutcome process(const RawPageRecord& record, Score score) const {
    PageOutcome out;
    if (!apply_prefilters(record, parser_.config().prefilters, &out.prefilter_errors)) {
      out.outcome = Outcome::Prefiltered;
      return out;
    }
    std::optional<Page> page;
    try {
      page = parser_.parse(record);
    } catch (const MalformedPageXml& e) {
      out.outcome = Outcome::Malformed;
      out.warning = e.what();
      return out;
    }
    if (!page) {
      out.outcome = Outcome::Redirect;
      return out;
    }
    if (!passes_postfilters(*page, postfilters_)) {
      out.outcome = Outcome::Postfiltered;
      return out;
    }
    if (views_ != nullptr) {
      views_->attach(*page);
      out.has_view = page->pageview.has_value();
    }
    out.revisions = page->revisions.size();
    score(*page, out);
    return out;
  }

 private:
  PageParser parser_;
  const std::vector<PostFilter>& postfilters_;
  const PageviewIndex* views_;
};

void tally(RunReport& report, PageOutcome& o) {
  ++report.pages_parsed;
  report.prefilter_errors += o.prefilter_errors;
  switch (o.outcome) {
    case Outcome::Measured:
      ++report.pages_measured;
      report.revisions_retained += o.revisions;
      report.pages_with_views += o.has_view ? 1 : 0;
      return;
    case Outcome::Prefiltered:
      ++report.pages_prefiltered;
      break;
    case Outcome::Redirect:
      ++report.pages_redirect_excluded;
      break;
    case Outcome::Postfiltered:
      ++report.pages_postfiltered;
      break;
    case Outcome::Malformed:
      ++report.pages_malformed;
      report.warnings.push_back("skipped malformed page: " + o.warning);
      break;
  }
  ++report.pages_filtered;
}

void finish_report(RunReport& report) {
  if (report.prefilter_errors > 0) {
    report.warnings.push_back(std::to_string(report.prefilter_errors) +
                              " records rejected because a prefilter failed to evaluate");
  }
  if (report.pageview_stats.malformed_lines > 0) {
    report.warnings.push_back(std::to_string(report.pageview_stats.malformed_lines) +
                              " malformed pageview lines skipped");
  }
  if (report.pageview_stats.undecodable_titles > 0) {
    report.warnings.push_back(std::to_string(report.pageview_stats.undecodable_titles) +
                              " pageview titles kept undecoded");
  }
}

}  // namespace

void validate(const RunConfig& config) {
  if (config.parallelism == 0) throw ConfigError("parallelism must be positive");
  if (config.judges == 0) throw ConfigError("the number of judges must be positive");
  if (config.measures.empty()) throw ConfigError("no measure selected");
  if (config.pageview_weighting && (!config.pageview_path || !config.project_tag)) {
    throw ConfigError("pageview weighting needs both a pageview path and a project tag");
  }
  if (config.project_tag && !is_valid_project_tag(*config.project_tag)) {
    throw ConfigError("invalid project tag '" + *config.project_tag + "'");
  }
}

RunResult run_ranking(const RunConfig& config) {
  validate(config);
  RunResult result;
  RunReport& report = result.report;

  std::optional<PageviewIndex> views;
  if (config.pageview_path) {
    views.emplace(load_pageviews(*config.pageview_path, config.project_tag, &report.pageview_stats,
                                 config.parallelism));
  }

  const Stage stage(config.parser, config.postfilters, views ? &*views : nullptr);
  const bool fused = config.measures.size() > 1;
  std::vector<std::vector<RevisionScore>> all_scores(config.measures.size());

  auto score = [&](const Page& page, PageOutcome& out) {
    out.scores.resize(config.measures.size());
    if (fused) {
      auto every = score_page_all(page, config.judges);
      for (std::size_t m = 0; m < config.measures.size(); ++m) {
        const auto pos = std::find(kAllMeasures.begin(), kAllMeasures.end(), config.measures[m]);
        out.scores[m] = std::move(every[static_cast<std::size_t>(pos - kAllMeasures.begin())]);
      }
    } else {
      out.scores[0] = score_page(page, config.measures[0], config.judges);
    }
    if (config.pageview_weighting) {
      for (auto& s : out.scores) s = pageview_weighted(std::move(s), page);
    }
  };

  for_each_batch(config.dump_path, config.parallelism, report, [&](std::vector<RawPageRecord>& batch) {
    std::vector<PageOutcome> outcomes(batch.size());
    parallel_for(config.parallelism, batch.size(),
                 [&](std::size_t i) { outcomes[i] = stage.process(batch[i], score); });
    for (auto& o : outcomes) {
      tally(report, o);
      for (std::size_t m = 0; m < o.scores.size(); ++m) {
        auto& dst = all_scores[m];
        dst.insert(dst.end(), std::make_move_iterator(o.scores[m].begin()),
                   std::make_move_iterator(o.scores[m].end()));
      }
    }
  });

  for (std::size_t m = 0; m < config.measures.size(); ++m) {
    result.rankings.push_back({config.measures[m], rank(reduce_by_contributor(std::move(all_scores[m])),
                                                        config.drop_zero, config.drop_anonymous)});
  }
  finish_report(report);
  for (const auto& w : report.warnings) spdlog::warn("{}", w);
  return result;
}

CountResult run_count(const std::filesystem::path& dump, const ParserConfig& parser,
                      const std::vector<PostFilter>& postfilters, std::size_t parallelism) {
  if (parallelism == 0) throw ConfigError("parallelism must be positive");
  CountResult result;
  const Stage stage(parser, postfilters, nullptr);
  for_each_batch(dump, parallelism, result.report, [&](std::vector<RawPageRecord>& batch) {
    std::vector<PageOutcome> outcomes(batch.size());
    parallel_for(parallelism, batch.size(),
                 [&](std::size_t i) { outcomes[i] = stage.process(batch[i], [](const Page&, PageOutcome&) {}); });
    for (auto& o : outcomes) tally(result.report, o);
  });
  finish_report(result.report);
  for (const auto& w : result.report.warnings) spdlog::warn("{}", w);
  result.pages = result.report.pages_measured;
  result.revisions = result.report.revisions_retained;
  return result;
}

ParserCheckResult run_parser_check(const std::filesystem::path& dump, const std::vector<PreFilter>& prefilters,
                                   std::shared_ptr<const RegexTable> regex_table, std::size_t parallelism) {
  const EquivalenceIds ids = parse_equivalence_ids(dump, prefilters, std::move(regex_table), parallelism);
  ParserCheckResult out;
  out.event_xml_revisions = ids.event_xml.size();
  out.regex_lines_revisions = ids.regex_lines.size();
  std::vector<std::uint64_t> only_event;
  std::vector<std::uint64_t> only_regex;
  std::set_difference(ids.event_xml.begin(), ids.event_xml.end(), ids.regex_lines.begin(), ids.regex_lines.end(),
                      std::back_inserter(only_event));
  std::set_difference(ids.regex_lines.begin(), ids.regex_lines.end(), ids.event_xml.begin(), ids.event_xml.end(),
                      std::back_inserter(only_regex));
  out.only_event_xml = only_event.size();
  out.only_regex_lines = only_regex.size();
  // Multiset comparison: a revision emitted twice by one side also diverges.
  out.pass = ids.event_xml == ids.regex_lines;
  if (!only_event.empty()) out.first_divergent = only_event.front();
  if (!only_regex.empty() && (!out.first_divergent || only_regex.front() < *out.first_divergent)) {
    out.first_divergent = only_regex.front();
  }
  return out;
}

}  // namespace wikimpact
