#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "test_support.hpp"
#include "wikimpact/error.hpp"
#include "wikimpact/output.hpp"
#include "wikimpact/pipeline.hpp"

using namespace wikimpact;
namespace wt = wikimpact::testing;

namespace {

const std::filesystem::path kFixture = wt::data_dir() / "fixture-pages-meta-history.xml";

std::string cli(const std::string& args) { return wt::run_command(std::string(WIKIMPACT_CLI) + " " + args); }

int cli_status(const std::string& args) {
  const int status = std::system((std::string(WIKIMPACT_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

std::string to_csv(const RunResult& r) {
  std::ostringstream out;
  write_rankings(out, r.rankings, OutputFormat::Csv);
  return out.str();
}

/// Many pages with random histories, bzip2-compressed with small blocks.
std::filesystem::path synthetic_dump(const wt::TempDir& dir, std::size_t pages, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Page> ps;
  for (std::size_t i = 0; i < pages; ++i) {
    Page p = oracle::random_history(rng, 12, 40, i + 1);
    p.ns = rng() % 4 == 0 ? 1 : 0;
    ps.push_back(std::move(p));
  }
  const auto path = dir / "synthetic-pages-meta-history.xml";
  wt::write_file(path, oracle::to_dump_xml(ps));
  return wt::bzip2_file(path, 1);
}

}  // namespace

TEST(RunCount, Fixture) {
  ParserConfig cfg;
  const auto all = run_count(kFixture, cfg);
  EXPECT_EQ(all.pages, 5u);
  EXPECT_EQ(all.revisions, 13u);
  EXPECT_EQ(all.report.pages_redirect_excluded, 2u);

  cfg.prefilters.push_back(PreFilter::main_namespace());
  const auto ns0 = run_count(kFixture, cfg);
  EXPECT_EQ(ns0.pages, 3u);
  EXPECT_EQ(ns0.revisions, 10u);
  EXPECT_EQ(ns0.report.pages_parsed, ns0.report.pages_filtered + ns0.report.pages_measured);

  const auto small = run_count(kFixture, ParserConfig{}, {PostFilter::max_revisions(2)});
  EXPECT_EQ(small.pages, 3u);
}

TEST(RunCount, TwoPagesThreeRevisions) {
  wt::TempDir dir;
  Page a, b;
  a.id = 1;
  a.title = "A";
  a.revisions.resize(2);
  a.revisions[0].id = 10;
  a.revisions[0].contributor = Contributor::registered(1, "X");
  a.revisions[1].id = 11;
  a.revisions[1].contributor = Contributor::registered(2, "Y");
  b.id = 2;
  b.title = "B";
  b.revisions.resize(1);
  b.revisions[0].id = 20;
  b.revisions[0].contributor = Contributor::anonymous("1.2.3.4");
  const auto path = dir / "tiny.xml";
  wt::write_file(path, oracle::to_dump_xml({a, b}));
  const auto r = run_count(path, ParserConfig{});
  EXPECT_EQ(r.pages, 2u);
  EXPECT_EQ(r.revisions, 3u);
}

TEST(RunRanking, EmptyDump) {
  wt::TempDir dir;
  wt::write_file(dir / "empty.xml", "<mediawiki>\n</mediawiki>\n");
  RunConfig cfg;
  cfg.dump_path = dir / "empty.xml";
  const auto r = run_ranking(cfg);
  ASSERT_EQ(r.rankings.size(), 1u);
  EXPECT_TRUE(r.rankings[0].ranking.empty());
  EXPECT_EQ(r.report.pages_parsed, 0u);
  EXPECT_EQ(r.report.revisions_retained, 0u);
}

TEST(RunRanking, NumEditsSumsToRetainedRevisions) {
  RunConfig cfg;
  cfg.dump_path = kFixture;
  cfg.parser.prefilters.push_back(PreFilter::main_namespace());
  const auto r = run_ranking(cfg);
  double total = 0;
  for (const auto& e : r.rankings[0].ranking) total += e.score.score;
  EXPECT_EQ(total, 10.0);
  EXPECT_EQ(r.report.revisions_retained, 10u);
}

TEST(RunRanking, PageviewWeighting) {
  wt::TempDir dir;
  wt::write_file(dir / "views", "aa Main_Page 10 1\naa Home 0 1\nab Main_Page 99 1\n");
  RunConfig cfg;
  cfg.dump_path = kFixture;
  cfg.parser.prefilters.push_back(PreFilter::main_namespace());
  cfg.pageview_path = dir / "views";
  cfg.project_tag = "aa";
  cfg.pageview_weighting = true;
  const auto r = run_ranking(cfg);
  EXPECT_EQ(r.report.pages_with_views, 2u);
  double total = 0;
  for (const auto& e : r.rankings[0].ranking) total += e.score.score;
  // Only page 1 has traffic: 5 retained revisions weighted by 10.
  EXPECT_EQ(total, 50.0);

  cfg.project_tag.reset();
  EXPECT_THROW(run_ranking(cfg), ConfigError);
  cfg.project_tag = "bad tag";
  EXPECT_THROW(run_ranking(cfg), ConfigError);
}

TEST(RunRanking, DeterministicAcrossParallelism) {
  wt::TempDir dir;
  const auto dump = synthetic_dump(dir, 400, 77);
  RunConfig cfg;
  cfg.dump_path = dump;
  cfg.measures.assign(kAllMeasures.begin(), kAllMeasures.end());
  cfg.judges = 4;
  cfg.parallelism = 1;
  const std::string reference = to_csv(run_ranking(cfg));
  for (const std::size_t p : {2u, 8u}) {
    cfg.parallelism = p;
    EXPECT_EQ(to_csv(run_ranking(cfg)), reference) << "parallelism " << p;
  }
}

TEST(RunParserCheck, PassAndFail) {
  EXPECT_TRUE(run_parser_check(kFixture).pass);
  auto broken = std::make_shared<RegexTable>();
  broken->ip = R"(\s*<ip>(1\.2\..*)</ip>\s*)";
  const auto r = run_parser_check(kFixture, {}, broken);
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.first_divergent.has_value());
}

TEST(Output, CsvAndJsonShapes) {
  const std::vector<RankedScore> ranking = {{1, RelevanceScore(5, "A, \"B\"", 2.5)}, {2, RelevanceScore(-3, "c", -0.0)}};
  std::ostringstream csv, json;
  write_ranking_csv(csv, ranking);
  write_ranking_json(json, ranking);
  EXPECT_EQ(csv.str(), "rank,subject_id,label,score\n1,5,\"A, \"\"B\"\"\",2.500000\n2,-3,c,0.000000\n");
  const auto parsed = nlohmann::json::parse(json.str());
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0]["label"], "A, \"B\"");
  EXPECT_EQ(parsed[1]["subject_id"], -3);
  EXPECT_EQ(parsed[0]["rank"], 1);
}

TEST(Cli, CountAndRank) {
  EXPECT_EQ(cli("count " + kFixture.string() + " 2>/dev/null"), "pages=3 revisions=10\n");
  EXPECT_EQ(cli("count --no-prefilter " + kFixture.string() + " 2>/dev/null"), "pages=5 revisions=13\n");
  const std::string csv = cli("rank --format csv --quiet " + kFixture.string());
  EXPECT_EQ(csv.rfind("rank,subject_id,label,score\n1,", 0), 0u);
  const std::string via_flag = cli("rank --format csv --quiet --dump " + kFixture.string());
  EXPECT_EQ(csv, via_flag);
  const auto json = nlohmann::json::parse(cli("rank --format json --quiet --measure all " + kFixture.string()));
  EXPECT_EQ(json.size(), 7u);
  EXPECT_TRUE(json.contains("text-longevity-with-penalty"));
}

TEST(Cli, EnvironmentAndFlagPrecedence) {
  const std::string base = "rank --quiet " + kFixture.string();
  const std::string env_csv = wt::run_command("WIKIMPACT_FORMAT=csv " + std::string(WIKIMPACT_CLI) + " " + base);
  EXPECT_EQ(env_csv.rfind("rank,subject_id,label,score\n", 0), 0u);
  const std::string flag_wins =
      wt::run_command("WIKIMPACT_FORMAT=csv " + std::string(WIKIMPACT_CLI) + " " + base + " --format json");
  EXPECT_EQ(flag_wins.front(), '[');
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli_status("parser-check " + kFixture.string()), 0);
  wt::TempDir dir;
  wt::write_file(dir / "table.json", R"({"ip": "\\s*<ip>(1\\.2\\..*)</ip>\\s*"})");
  EXPECT_EQ(cli_status("parser-check --no-prefilter --regex-table " + (dir / "table.json").string() + " " +
                       kFixture.string()),
            1);
  EXPECT_EQ(cli_status("rank --dump " + (dir / "missing.xml.bz2").string()), 1);
  EXPECT_EQ(cli_status("rank --pageview-weighting " + kFixture.string()), 1);
  EXPECT_EQ(cli_status("rank --measure nonsense " + kFixture.string()), 105);
  EXPECT_EQ(cli_status("merge-pageviews " + dir.path().string() + "/nothing " + (dir / "out").string()), 1);
}

TEST(Cli, MergeAndBench) {
  wt::TempDir dir;
  std::filesystem::create_directories(dir / "in");
  wt::write_file(dir / "in" / "a", "aa X 1 1\n");
  wt::write_file(dir / "in" / "b", "aa Y 2 2\n");
  wt::write_file(dir / "in" / "c", "aa Z 3 3");
  const std::string report = cli("merge-pageviews " + (dir / "in").string() + " " + (dir / "merged.gz").string());
  EXPECT_NE(report.find("lines_written=3"), std::string::npos);
  const std::string bench = cli("bench-report --format csv --workers 1,2 " +
                                (wt::data_dir() / "sample1.bz2").string() +
                                " --reference-time 02:45:07 --candidate-time 8:40.59");
  EXPECT_NE(bench.find("sample1.bz2 @2"), std::string::npos);
  EXPECT_NE(bench.find("speedup_percent=1803.03"), std::string::npos);
  const std::string filters = cli("bench-report --filter-dump " + kFixture.string());
  EXPECT_NE(filters.find("regex-prefilter"), std::string::npos);
}
