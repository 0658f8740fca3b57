#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "test_support.hpp"
#include "wikimpact/error.hpp"
#include "wikimpact/pageviews.hpp"

using namespace wikimpact;
namespace wt = wikimpact::testing;

TEST(ParsePageviewLine, WorkedLine) {
  const auto v = parse_pageview_line("aa Main_Page 5 1234");
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(*v, (Pageview{"aa", "Main Page", 5, 1234}));
}

TEST(ParsePageviewLine, PercentDecoding) {
  EXPECT_EQ(parse_pageview_line("de Caf%C3%A9_M%C3%BCller 2 10")->page_title, "Caf\xC3\xA9 M\xC3\xBCller");
  EXPECT_EQ(parse_pageview_line("en AC%2FDC 1 1")->page_title, "AC/DC");
  EXPECT_EQ(parse_pageview_line("en C++ 1 1")->page_title, "C++");
  EXPECT_EQ(parse_pageview_line("en A%2bB 1 1\r")->page_title, "A+B");
}

TEST(ParsePageviewLine, UndecodableTitlesKeptAndCounted) {
  PageviewStats stats;
  EXPECT_EQ(parse_pageview_line("en 100%_sure 1 1", &stats)->page_title, "100% sure");
  EXPECT_EQ(parse_pageview_line("en Bad%E9 1 1", &stats)->page_title, "Bad%E9");
  EXPECT_EQ(parse_pageview_line("en Trail% 1 1", &stats)->page_title, "Trail%");
  EXPECT_EQ(stats.undecodable_titles, 3u);
  EXPECT_EQ(stats.malformed_lines, 0u);
}

TEST(ParsePageviewLine, MalformedLines) {
  PageviewStats stats;
  for (const char* bad : {"", "aa Main_Page 5", "aa Main_Page 5 1234 extra", "aa Main_Page five 1234",
                          "aa Main_Page -5 1234", "aa  5 1234", "aa Main Page 5 1234", "aa\tMain_Page 5 1234"}) {
    EXPECT_FALSE(parse_pageview_line(bad, &stats).has_value()) << bad;
  }
  EXPECT_EQ(stats.malformed_lines, 8u);
}

TEST(ProjectTag, Validation) {
  for (const char* ok : {"aa", "en", "bg.d", "en.m", "de.mw", "zh-min-nan", "commons.m"}) {
    EXPECT_TRUE(is_valid_project_tag(ok)) << ok;
  }
  for (const char* bad : {"", ".d", "en.x", "EN", "en.", "a b"}) EXPECT_FALSE(is_valid_project_tag(bad)) << bad;
}

TEST(Aggregate, SumsPerProjectAndTitle) {
  const std::vector<Pageview> in = {{"aa", "X", 1, 10}, {"ab", "X", 2, 20}, {"aa", "X", 3, 30}, {"aa", "Y", 4, 40}};
  EXPECT_EQ(aggregate_pageviews(in, std::string("aa")),
            (std::vector<Pageview>{{"aa", "X", 4, 40}, {"aa", "Y", 4, 40}}));
  EXPECT_EQ(aggregate_pageviews(in, std::nullopt),
            (std::vector<Pageview>{{"aa", "X", 4, 40}, {"aa", "Y", 4, 40}, {"ab", "X", 2, 20}}));
  // Project match is exact: "aa" does not select "aa.d".
  EXPECT_TRUE(aggregate_pageviews({{"aa.d", "X", 1, 1}}, std::string("aa")).empty());
}

TEST(Aggregate, ConservesTotals) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Pageview> in;
    for (std::size_t n = rng() % 60; n > 0; --n) {
      in.push_back({rng() % 2 ? "aa" : "ab", "T" + std::to_string(rng() % 7), rng() % 1000, rng() % 100000});
    }
    const auto sum = [](const std::vector<Pageview>& v, const std::string* project) {
      std::uint64_t s = 0;
      for (const auto& p : v) {
        if (!project || p.project_name == *project) s += p.request_count;
      }
      return s;
    };
    const std::string aa = "aa";
    ASSERT_EQ(sum(aggregate_pageviews(in, std::nullopt), nullptr), sum(in, nullptr));
    ASSERT_EQ(sum(aggregate_pageviews(in, aa), nullptr), sum(in, &aa));
  }
}

TEST(Join, LeftOuterPreservesPages) {
  std::vector<Page> pages(3);
  pages[0].title = "Main Page";
  pages[1].title = "Other";
  pages[2].title = "Main Page";
  const auto joined = join_pages_with_views(pages, {{"aa", "Main Page", 5, 1234}, {"aa", "Unrelated", 1, 1}});
  ASSERT_EQ(joined.size(), 3u);
  EXPECT_EQ(joined[0].pageview->request_count, 5u);
  EXPECT_FALSE(joined[1].pageview.has_value());
  EXPECT_EQ(joined[2].pageview->request_count, 5u);
}

TEST(Join, SameTitleAcrossProjectsIsSummed) {
  std::vector<Page> pages(1);
  pages[0].title = "X";
  const auto joined = join_pages_with_views(pages, {{"aa", "X", 5, 1}, {"ab", "X", 7, 1}});
  EXPECT_EQ(joined[0].pageview->request_count, 12u);
}

TEST(Load, DirectoryOfCompressedShards) {
  wt::TempDir dir;
  wt::write_file(dir / "pagecounts-20160504-050000", "aa Main_Page 5 1234\nab Main_Page 9 1\nbroken\n");
  wt::write_file(dir / "pagecounts-20160504-060000", "aa Main_Page 2 100\r\naa Other 1 1");
  wt::bzip2_file(dir / "pagecounts-20160504-060000");
  std::filesystem::remove(dir / "pagecounts-20160504-060000");
  for (const std::size_t workers : {1u, 4u}) {
    PageviewStats stats;
    const auto views = load_pageviews(dir.path(), std::string("aa"), &stats, workers);
    EXPECT_EQ(views, (std::vector<Pageview>{{"aa", "Main Page", 7, 1334}, {"aa", "Other", 1, 1}}));
    // "broken" belongs to no project, so the project filter drops it first.
    EXPECT_EQ(stats.malformed_lines, 0u);
  }
  PageviewStats all;
  EXPECT_EQ(load_pageviews(dir.path(), std::nullopt, &all).size(), 3u);
  EXPECT_EQ(all.malformed_lines, 1u);
}

TEST(Load, Errors) {
  wt::TempDir dir;
  EXPECT_THROW(load_pageviews(dir.path(), std::nullopt), EmptyDirectory);
  EXPECT_THROW(load_pageviews(dir / "missing", std::nullopt), IoError);
}
