// Command-line front end: rank, count, merge-pageviews, parser-check and
// bench-report.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wikimpact/bench.hpp"
#include "wikimpact/decompress.hpp"
#include "wikimpact/error.hpp"
#include "wikimpact/file_merger.hpp"
#include "wikimpact/output.hpp"
#include "wikimpact/pipeline.hpp"

namespace {

using namespace wikimpact;

/// Options shared by every subcommand that parses a dump.
struct ParseOptions {
  std::vector<std::string> prefilters;
  bool no_prefilter = false;
  std::vector<std::string> postfilters;
  std::string parser = "auto";
  bool no_collapse = false;
  std::string regex_table_file;
  std::size_t parallelism = 1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--prefilter", prefilters,
                   "Raw-record filter: regex:<pattern>, xpath:<expr> or xquery:<expr>; repeatable. "
                   "Replaces the default main-namespace regex");
    cmd.add_flag("--no-prefilter", no_prefilter, "Disable the default main-namespace prefilter");
    cmd.add_option("--postfilter", postfilters, "Parsed-page filter: ns=N, min-revisions=N or max-revisions=N");
    cmd.add_option("--parser", parser, "Parser variant")
        ->check(CLI::IsMember({"auto", "event", "regex"}))
        ->envname("WIKIMPACT_PARSER");
    cmd.add_flag("--no-collapse", no_collapse, "Keep consecutive revisions by the same author");
    cmd.add_option("--regex-table", regex_table_file,
                   "JSON object overriding patterns of the line parser (keys as in RegexTable)")
        ->check(CLI::ExistingFile);
    cmd.add_option("--parallelism", parallelism, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->envname("WIKIMPACT_PARALLELISM");
  }

  std::vector<PreFilter> build_prefilters() const {
    std::vector<PreFilter> out;
    if (no_prefilter) return out;
    if (prefilters.empty()) {
      out.push_back(PreFilter::main_namespace());
      return out;
    }
    for (const auto& p : prefilters) out.push_back(parse_prefilter(p));
    return out;
  }

  std::vector<PostFilter> build_postfilters() const {
    std::vector<PostFilter> out;
    for (const auto& p : postfilters) out.push_back(parse_postfilter(p));
    return out;
  }

  std::shared_ptr<const RegexTable> build_regex_table() const {
    if (regex_table_file.empty()) return nullptr;
    std::ifstream in(regex_table_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot read regex table " + regex_table_file + ": " + e.what());
    }
    auto table = std::make_shared<RegexTable>();
    const std::map<std::string, std::string*> fields = {
        {"title", &table->title},
        {"ns", &table->ns},
        {"id", &table->id},
        {"redirect", &table->redirect},
        {"revision_open", &table->revision_open},
        {"revision_close", &table->revision_close},
        {"parent_id", &table->parent_id},
        {"timestamp", &table->timestamp},
        {"contributor_open", &table->contributor_open},
        {"contributor_close", &table->contributor_close},
        {"username", &table->username},
        {"ip", &table->ip},
        {"text_open", &table->text_open},
        {"text_close", &table->text_close},
    };
    if (!j.is_object()) throw ConfigError("regex table must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      const auto it = fields.find(key);
      if (it == fields.end() || !value.is_string()) {
        throw ConfigError("regex table: unknown key or non-string value for '" + key + "'");
      }
      *it->second = value.get<std::string>();
    }
    return table;
  }

  ParserConfig build_parser(const std::filesystem::path& dump) const {
    ParserConfig cfg;
    if (parser == "event") {
      cfg.variant = ParserVariant::EventXml;
    } else if (parser == "regex") {
      cfg.variant = ParserVariant::RegexLines;
    } else {
      cfg.variant = default_variant_for(dump);
    }
    cfg.prefilters = build_prefilters();
    cfg.collapse_consecutive = !no_collapse;
    cfg.regex_table = build_regex_table();
    return cfg;
  }
};

OutputFormat parse_format(const std::string& f) {
  if (f == "csv") return OutputFormat::Csv;
  if (f == "json") return OutputFormat::Json;
  return OutputFormat::Console;
}

/// Runs `write` against --output or stdout.
template <typename Write>
void emit(const std::string& output, Write write) {
  if (output.empty() || output == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw IoError("cannot open " + output + " for writing");
  write(out);
  if (!out.flush()) throw IoError("failed writing " + output);
}

std::string stage_of(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidExpression*>(&e)) return "config";
  if (dynamic_cast<const MalformedHeader*>(&e) || dynamic_cast<const CorruptBlock*>(&e)) return "decompress";
  if (dynamic_cast<const UnterminatedPage*>(&e) || dynamic_cast<const UnsplittableRecord*>(&e)) return "split";
  if (dynamic_cast<const MalformedPageXml*>(&e) || dynamic_cast<const FilterEvaluationError*>(&e)) return "parse";
  if (dynamic_cast<const DivisionByZero*>(&e) || dynamic_cast<const EmptyCollection*>(&e)) return "process";
  if (dynamic_cast<const InvalidSample*>(&e)) return "bench";
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const EmptyDirectory*>(&e)) return "io";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Author impact rankings from MediaWiki edit-history dumps", "wikimpact"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "wikimpact 0.1.0");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->envname("WIKIMPACT_LOG_LEVEL");

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "Score contributors of a dump and print the ranking");
  ParseOptions rank_parse;
  rank_parse.add_to(*rank_cmd);
  std::string dump_flag, pageviews_flag, project_flag;
  std::string dump_pos, pageviews_pos, project_pos;
  std::string measure = "num-edits";
  std::size_t judges = kDefaultJudges;
  std::string format = "console";
  std::string output;
  bool drop_zero = false, drop_anonymous = false, weighting = false, quiet = false;
  rank_cmd->add_option("dump_file", dump_pos, "Dump file (positional form of --dump)");
  rank_cmd->add_option("pageview_input", pageviews_pos, "Pageview file or directory (positional form of --pageviews)");
  rank_cmd->add_option("project_tag", project_pos, "Project tag (positional form of --project)");
  rank_cmd->add_option("--dump", dump_flag, "Dump file (.xml, .xml.gz or .xml.bz2)")->envname("WIKIMPACT_DUMP");
  rank_cmd->add_option("--pageviews", pageviews_flag, "Pageview file or directory")
      ->envname("WIKIMPACT_PAGEVIEWS");
  rank_cmd->add_option("--project", project_flag, "Project tag, e.g. aa or bg.d")->envname("WIKIMPACT_PROJECT");
  std::vector<std::string> measure_names = {"all"};
  for (const Measure m : kAllMeasures) measure_names.emplace_back(measure_name(m));
  rank_cmd->add_option("--measure", measure, "Contribution measure, or all")
      ->check(CLI::IsMember(measure_names))
      ->envname("WIKIMPACT_MEASURE");
  rank_cmd->add_option("--judges", judges, "Judging revisions for the longevity measures")
      ->check(CLI::PositiveNumber)
      ->envname("WIKIMPACT_JUDGES");
  rank_cmd->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"console", "csv", "json"}))
      ->envname("WIKIMPACT_FORMAT");
  rank_cmd->add_option("--output", output, "Output file (default stdout)")->envname("WIKIMPACT_OUTPUT");
  rank_cmd->add_flag("--drop-zero", drop_zero, "Remove contributors with a score of zero");
  rank_cmd->add_flag("--drop-anonymous", drop_anonymous, "Remove the anonymous contributor");
  rank_cmd->add_flag("--pageview-weighting", weighting, "Multiply scores by the page's request count");
  rank_cmd->add_flag("--quiet", quiet, "Do not print the run report on stderr");

  // count
  auto* count_cmd = app.add_subcommand("count", "Count processable pages and revisions of a dump");
  ParseOptions count_parse;
  count_parse.add_to(*count_cmd);
  std::string count_dump;
  std::string count_format = "console";
  count_cmd->add_option("dump", count_dump, "Dump file")->required()->check(CLI::ExistingFile);
  count_cmd->add_option("--format", count_format, "Output format")
      ->check(CLI::IsMember({"console", "json"}))
      ->envname("WIKIMPACT_FORMAT");

  // merge-pageviews
  auto* merge_cmd = app.add_subcommand("merge-pageviews", "Concatenate the files of a directory into one file");
  std::string merge_in, merge_out, merge_codec = "auto";
  merge_cmd->add_option("input_dir", merge_in, "Directory of (optionally compressed) files")->required();
  merge_cmd->add_option("output", merge_out, "Merged output file")->required();
  merge_cmd->add_option("--codec", merge_codec, "Output compression (auto picks from the suffix)")
      ->check(CLI::IsMember({"auto", "none", "gzip", "bzip2"}));

  // parser-check
  auto* check_cmd = app.add_subcommand("parser-check", "Compare the revision ids of both parser variants");
  ParseOptions check_parse;
  check_parse.add_to(*check_cmd);
  std::string check_dump;
  check_cmd->add_option("dump", check_dump, "Dump file")->required()->check(CLI::ExistingFile);

  // bench-report
  auto* bench_cmd = app.add_subcommand("bench-report", "Decompression throughput, filter timings and speed-up");
  std::vector<std::string> bench_inputs;
  std::vector<std::size_t> bench_workers = {1};
  std::string bench_format = "console";
  std::string filter_dump;
  std::string ref_time, cand_time;
  bench_cmd->add_option("inputs", bench_inputs, "Files to decompress")->check(CLI::ExistingFile);
  bench_cmd->add_option("--workers", bench_workers, "Worker counts to measure")
      ->delimiter(',')
      ->allow_extra_args(false)
      ->check(CLI::PositiveNumber)
      ->envname("WIKIMPACT_BENCH_WORKERS");
  bench_cmd->add_option("--format", bench_format, "Output format")
      ->check(CLI::IsMember({"console", "csv"}))
      ->envname("WIKIMPACT_FORMAT");
  bench_cmd->add_option("--filter-dump", filter_dump, "Time the main-namespace filter variants on this dump")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--reference-time", ref_time, "Reference duration (h:mm:ss, m:ss.cc or seconds)");
  bench_cmd->add_option("--candidate-time", cand_time, "Candidate duration (h:mm:ss, m:ss.cc or seconds)");

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("wikimpact");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*rank_cmd) {
      RunConfig cfg;
      const std::string dump = !dump_flag.empty() ? dump_flag : dump_pos;
      if (dump.empty()) throw ConfigError("no dump given");
      cfg.dump_path = dump;
      const std::string pv = !pageviews_flag.empty() ? pageviews_flag : pageviews_pos;
      if (!pv.empty()) cfg.pageview_path = pv;
      const std::string project = !project_flag.empty() ? project_flag : project_pos;
      if (!project.empty()) cfg.project_tag = project;
      cfg.measures = measure == "all" ? std::vector<Measure>(kAllMeasures.begin(), kAllMeasures.end())
                                      : std::vector<Measure>{parse_measure(measure)};
      cfg.judges = judges;
      cfg.parser = rank_parse.build_parser(cfg.dump_path);
      cfg.postfilters = rank_parse.build_postfilters();
      cfg.parallelism = rank_parse.parallelism;
      cfg.output_format = parse_format(format);
      cfg.drop_zero = drop_zero;
      cfg.drop_anonymous = drop_anonymous;
      cfg.pageview_weighting = weighting;
      const RunResult result = run_ranking(cfg);
      emit(output, [&](std::ostream& out) { write_rankings(out, result.rankings, cfg.output_format); });
      if (!quiet) write_report(std::cerr, result.report);
      return 0;
    }
    if (*count_cmd) {
      const ParserConfig parser = count_parse.build_parser(count_dump);
      const CountResult r = run_count(count_dump, parser, count_parse.build_postfilters(), count_parse.parallelism);
      if (count_format == "json") {
        nlohmann::ordered_json j;
        j["pages"] = r.pages;
        j["revisions"] = r.revisions;
        j["pages_parsed"] = r.report.pages_parsed;
        j["pages_filtered"] = r.report.pages_filtered;
        j["duplicate_records"] = r.report.duplicate_records;
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << fmt::format("pages={} revisions={}\n", r.pages, r.revisions);
        write_report(std::cerr, r.report);
      }
      return 0;
    }
    if (*merge_cmd) {
      Codec codec = codec_for_path(merge_out);
      if (merge_codec == "none") codec = Codec::None;
      if (merge_codec == "gzip") codec = Codec::Gzip;
      if (merge_codec == "bzip2") codec = Codec::Bzip2;
      const MergeReport r = merge_files(merge_in, merge_out, codec);
      std::cout << fmt::format("files_read={} lines_written={} bytes_in={} bytes_out={}\n", r.files_read,
                               r.lines_written, r.bytes_in, r.bytes_out);
      return 0;
    }
    if (*check_cmd) {
      const ParserCheckResult r = run_parser_check(check_dump, check_parse.build_prefilters(),
                                                   check_parse.build_regex_table(), check_parse.parallelism);
      if (r.pass) {
        std::cout << fmt::format("PASS revisions={}\n", r.event_xml_revisions);
        return 0;
      }
      std::cout << fmt::format("FAIL first_divergent_revision={} event_only={} regex_only={}\n",
                               r.first_divergent ? std::to_string(*r.first_divergent) : std::string("none"),
                               r.only_event_xml, r.only_regex_lines);
      return 1;
    }
    if (*bench_cmd) {
      std::vector<BenchSample> samples;
      for (const auto& input : bench_inputs) {
        for (const std::size_t w : bench_workers) {
          BenchSample s = measure_decompression(input, w);
          s.label = fmt::format("{} @{}", s.label, w);
          samples.push_back(std::move(s));
        }
      }
      if (!samples.empty()) {
        if (bench_format == "csv") {
          write_bench_csv(std::cout, samples);
        } else {
          write_bench_table(std::cout, samples);
        }
      }
      if (!filter_dump.empty()) {
        struct Variant {
          std::string name;
          std::vector<std::string> prefilters;
          std::vector<PostFilter> postfilters;
        };
        const std::vector<Variant> variants = {
            {"regex-prefilter", {"regex:(?is).*<ns>0</ns>.*"}, {}},
            {"xpath-prefilter", {"xpath:/page[ns = 0]"}, {}},
            {"xquery-prefilter", {"xquery:for $p in /page where $p/ns eq 0 return $p"}, {}},
            {"postfilter", {}, {PostFilter::namespace_equals(0)}},
        };
        std::cout << (bench_format == "csv" ? "filter,elapsed_ms,pages,revisions\n" : "");
        for (const auto& v : variants) {
          ParserConfig cfg;
          cfg.variant = default_variant_for(filter_dump);
          for (const auto& p : v.prefilters) cfg.prefilters.push_back(parse_prefilter(p));
          const auto t0 = std::chrono::steady_clock::now();
          const CountResult r = run_count(filter_dump, cfg, v.postfilters, bench_workers.front());
          const double ms =
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          std::cout << (bench_format == "csv"
                            ? fmt::format("{},{:.3f},{},{}\n", v.name, ms, r.pages, r.revisions)
                            : fmt::format("{:<18} {:>10.1f} ms  pages={} revisions={}\n", v.name, ms, r.pages,
                                          r.revisions));
        }
      }
      if (!ref_time.empty() || !cand_time.empty()) {
        if (ref_time.empty() || cand_time.empty()) {
          throw ConfigError("--reference-time and --candidate-time go together");
        }
        const double ref = parse_duration(ref_time);
        const double cand = parse_duration(cand_time);
        std::cout << fmt::format("speedup_percent={:.2f} reference_s={:.2f} candidate_s={:.2f}\n",
                                 speedup_percent(ref, cand), ref, cand);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}: {} stage failed: {}", command, stage_of(e), e.what());
    return 1;
  }
  return 0;
}
