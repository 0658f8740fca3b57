#include "wikimpact/output.hpp"

#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace wikimpact {
namespace {

/// Avoids "-0.000000" for negative zero.
double printable(double v) { return v == 0.0 ? 0.0 : v; }

nlohmann::ordered_json ranking_json(const std::vector<RankedScore>& ranking) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : ranking) {
    nlohmann::ordered_json row;
    row["rank"] = r.rank;
    row["subject_id"] = r.score.subject_id;
    row["label"] = r.score.label;
    row["score"] = printable(r.score.score);
    arr.push_back(std::move(row));
  }
  return arr;
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_ranking_csv(std::ostream& out, const std::vector<RankedScore>& ranking) {
  out << "rank,subject_id,label,score\n";
  for (const auto& r : ranking) {
    out << fmt::format("{},{},{},{:.6f}\n", r.rank, r.score.subject_id, csv_field(r.score.label),
                       printable(r.score.score));
  }
}

void write_ranking_json(std::ostream& out, const std::vector<RankedScore>& ranking) {
  out << ranking_json(ranking).dump(2) << '\n';
}

void write_ranking_console(std::ostream& out, const std::vector<RankedScore>& ranking) {
  std::size_t label_width = 5;
  for (const auto& r : ranking) label_width = std::max(label_width, r.score.label.size());
  out << fmt::format("{:>6}  {:>20}  {:<{}}  {:>16}\n", "rank", "subject_id", "label", label_width, "score");
  for (const auto& r : ranking) {
    out << fmt::format("{:>6}  {:>20}  {:<{}}  {:>16.6f}\n", r.rank, r.score.subject_id, r.score.label, label_width,
                       printable(r.score.score));
  }
}

void write_rankings(std::ostream& out, const std::vector<MeasureRanking>& rankings, OutputFormat format) {
  if (format == OutputFormat::Json) {
    if (rankings.size() == 1) {
      write_ranking_json(out, rankings.front().ranking);
      return;
    }
    nlohmann::ordered_json all;
    for (const auto& r : rankings) all[std::string(measure_name(r.measure))] = ranking_json(r.ranking);
    out << all.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (rankings.size() > 1) {
      if (i > 0) out << '\n';
      out << "# " << measure_name(rankings[i].measure) << '\n';
    }
    if (format == OutputFormat::Csv) {
      write_ranking_csv(out, rankings[i].ranking);
    } else {
      write_ranking_console(out, rankings[i].ranking);
    }
  }
}

void write_report(std::ostream& out, const RunReport& report) {
  out << fmt::format(
      "pages_parsed={} pages_filtered={} (prefilter={} redirect={} postfilter={} malformed={}) "
      "pages_measured={} revisions_retained={} duplicate_records={}\n",
      report.pages_parsed, report.pages_filtered, report.pages_prefiltered, report.pages_redirect_excluded,
      report.pages_postfiltered, report.pages_malformed, report.pages_measured, report.revisions_retained,
      report.duplicate_records);
  if (report.pageview_stats.malformed_lines + report.pageview_stats.undecodable_titles + report.pages_with_views >
      0) {
    out << fmt::format("pages_with_views={} pageview_malformed_lines={} pageview_undecodable_titles={}\n",
                       report.pages_with_views, report.pageview_stats.malformed_lines,
                       report.pageview_stats.undecodable_titles);
  }
  out << fmt::format("warnings={}\n", report.warnings.size());
}

}  // namespace wikimpact
