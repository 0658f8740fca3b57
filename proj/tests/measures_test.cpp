#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wikimpact/error.hpp"
#include "wikimpact/lcs.hpp"
#include "wikimpact/measures.hpp"

using namespace wikimpact;

namespace {

Revision rev(std::uint64_t id, std::string text, Contributor c) {
  Revision r;
  r.id = id;
  r.text = std::move(text);
  r.contributor = std::move(c);
  return r;
}

Page history(const std::vector<std::string>& texts) {
  Page p;
  p.id = 1;
  std::uint64_t id = 1;
  for (const auto& t : texts) {
    p.revisions.push_back(rev(id, t, Contributor::registered(id, "U" + std::to_string(id))));
    ++id;
  }
  return p;
}

std::vector<double> scores_of(const Page& p, Measure m, std::size_t judges = kDefaultJudges) {
  std::vector<double> out;
  for (const auto& s : score_page(p, m, judges)) out.push_back(s.score);
  return out;
}

/// Plain O(nm) table; the reference for LCS lengths.
std::size_t dp_lcs(const std::vector<lcs::Symbol>& a, const std::vector<lcs::Symbol>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

std::vector<lcs::Symbol> random_symbols(std::mt19937_64& rng, std::size_t len, std::uint32_t alphabet) {
  std::vector<lcs::Symbol> s(len);
  for (auto& x : s) x = static_cast<lcs::Symbol>(rng() % alphabet);
  return s;
}

}  // namespace

TEST(Tokenize, SplitsOnWhitespaceRuns) {
  EXPECT_EQ(tokenize("the cat  sat"), (TokenSeq{"the", "cat", "sat"}));
  EXPECT_EQ(tokenize(""), TokenSeq{});
  EXPECT_EQ(tokenize("a\nb\tc"), (TokenSeq{"a", "b", "c"}));
  EXPECT_EQ(tokenize("  \r\n "), TokenSeq{});
  EXPECT_EQ(tokenize("end."), TokenSeq{"end."});
}

TEST(Tokenize, UnicodeWhitespaceSeparates) {
  // U+00A0, U+2003, U+3000, U+0085
  EXPECT_EQ(tokenize("a\xC2\xA0" "b\xE2\x80\x83" "c\xE3\x80\x80" "d\xC2\x85" "e"),
            (TokenSeq{"a", "b", "c", "d", "e"}));
  // U+00E9 and U+20AC are letters/symbols, not separators.
  EXPECT_EQ(tokenize("caf\xC3\xA9 \xE2\x82\xAC"), (TokenSeq{"caf\xC3\xA9", "\xE2\x82\xAC"}));
}

TEST(WordDiff, Examples) {
  const WordDiff d = word_diff({"the", "cat", "sat"}, {"the", "dog", "sat"});
  EXPECT_EQ(d.inserted, 1u);
  EXPECT_EQ(d.deleted, 1u);
  EXPECT_EQ(d.added_tokens, std::vector<std::string>{"dog"});

  const TokenSeq x = {"p", "q", "r"};
  EXPECT_EQ(word_diff(x, x), (WordDiff{0, 0, {}}));
  EXPECT_EQ(word_diff({}, {"a", "b"}), (WordDiff{2, 0, {"a", "b"}}));
}

TEST(WordDiff, PinnedAlignmentPrefersEarliestNewerTokens) {
  // Both "a" and "b" are maximum alignments; the earliest newer index wins.
  EXPECT_EQ(word_diff({"a", "b"}, {"b", "a"}).added_tokens, std::vector<std::string>{"a"});
  // The common suffix is matched before the middle is aligned.
  EXPECT_EQ(word_diff({"x", "a"}, {"a", "y", "a"}).added_tokens, (std::vector<std::string>{"a", "y"}));
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(edit_distance({}, {"a", "b", "c", "d"}), 4.0);
  EXPECT_EQ(edit_distance({"a", "b"}, {"a", "b"}), 0.0);
  EXPECT_EQ(edit_distance({"a", "b", "c"}, {"a"}), 2.0);
}

TEST(EditQuality, Examples) {
  const TokenSeq cur = tokenize("a b c d");
  EXPECT_DOUBLE_EQ(*edit_quality({}, cur, cur), 1.0);
  EXPECT_DOUBLE_EQ(*edit_quality({}, cur, tokenize("a b")), 0.0);
  EXPECT_FALSE(edit_quality(cur, cur, {}).has_value());
}

TEST(LiveTokens, MultisetIntersection) {
  EXPECT_EQ(live_tokens({"x", "y"}, {"x", "z"}), 1u);
  EXPECT_EQ(live_tokens({}, {"x"}), 0u);
  EXPECT_EQ(live_tokens({"a", "a"}, {"a", "b"}), 1u);
}

TEST(ScorePage, SpecExamples) {
  EXPECT_EQ(scores_of(history({"a b c"}), Measure::TextOnly), std::vector<double>{3.0});
  const Page p = history({"a b c d", "a b"});
  EXPECT_EQ(scores_of(p, Measure::TextLongevity), (std::vector<double>{2.0, 0.0}));
  EXPECT_EQ(scores_of(p, Measure::EditLongevity), (std::vector<double>{0.0, 0.0}));
}

TEST(ScorePage, LastRevisionEdgeRules) {
  const Page p = history({"a", "a b c"});
  // Last revision: TextLongevity keeps everything, the others score 0.
  EXPECT_EQ(scores_of(p, Measure::TextLongevity)[1], 2.0);
  EXPECT_EQ(scores_of(p, Measure::EditLongevity)[1], 0.0);
  EXPECT_EQ(scores_of(p, Measure::TenRevisions)[1], 0.0);
}

TEST(ScorePage, TenRevisionsLooksTenAhead) {
  std::vector<std::string> texts = {"w"};
  for (int i = 0; i < 11; ++i) texts.push_back("x" + std::to_string(i));
  texts[10] = "w";  // r_10 keeps the word of r_0; r_11 does not.
  const Page p = history(texts);
  EXPECT_EQ(scores_of(p, Measure::TenRevisions, 3)[0], 1.0);
  EXPECT_EQ(scores_of(p, Measure::TenRevisions, 3)[1], 0.0);
}

TEST(ScorePage, PenaltyOnlyLowersScores) {
  // r1 is reverted by r2, so its edit longevity is negative.
  const Page p = history({"a b c", "a b c x y z", "a b c"});
  const auto tl = scores_of(p, Measure::TextLongevity);
  const auto el = scores_of(p, Measure::EditLongevity);
  const auto tlwp = scores_of(p, Measure::TextLongevityWithPenalty);
  EXPECT_LT(el[1], 0.0);
  EXPECT_DOUBLE_EQ(tlwp[1], tl[1] + el[1]);
  EXPECT_DOUBLE_EQ(tlwp[0], tl[0]);
}

TEST(ScorePage, CarriesIdsAndLabels) {
  Page p;
  p.revisions = {rev(7, "a", Contributor::anonymous("1.2.3.4")), rev(8, "b", Contributor::registered(3, "Zed"))};
  const auto s = score_page(p, Measure::NumEdits);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].revision_id, 7u);
  EXPECT_EQ(s[0].label, std::string(kAnonymousUsername));
  EXPECT_EQ(s[0].contributor_id, identifier(Contributor::anonymous("9.9.9.9")));
  EXPECT_EQ(s[1].label, "Zed");
}

TEST(ScorePage, ZeroJudgesRejected) {
  EXPECT_THROW(score_page(history({"a"}), Measure::TextLongevity, 0), ConfigError);
}

TEST(ScorePage, FusedMatchesSingle) {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 50; ++n) {
    const Page p = oracle::random_history(rng, 8, 10);
    const auto all = score_page_all(p, 3);
    for (std::size_t m = 0; m < kAllMeasures.size(); ++m) EXPECT_EQ(all[m], score_page(p, kAllMeasures[m], 3));
  }
}

TEST(MeasureNames, RoundTrip) {
  for (const Measure m : kAllMeasures) EXPECT_EQ(parse_measure(measure_name(m)), m);
  EXPECT_THROW(parse_measure("wikitrust"), ConfigError);
}

TEST(Reduce, SumsPerContributor) {
  const std::vector<RevisionScore> in = {{1, 10, "u", 2.0}, {2, 10, "u", 3.0}, {3, 20, "v", 1.0}};
  const auto out = reduce_by_contributor(in);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], RelevanceScore(10, "u", 5.0));
  EXPECT_EQ(out[1], RelevanceScore(20, "v", 1.0));
  EXPECT_TRUE(reduce_by_contributor({}).empty());
}

TEST(Reduce, IndependentOfInputOrderAndSharding) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> score(-3.0, 7.0);
  std::vector<RevisionScore> in;
  for (std::uint64_t i = 0; i < 400; ++i) {
    const std::int64_t who = static_cast<std::int64_t>(rng() % 13);
    in.push_back({i + 1, who, "user" + std::to_string(who), score(rng)});
  }
  const auto reference = reduce_by_contributor(in);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(in.begin(), in.end(), rng);
    EXPECT_EQ(reduce_by_contributor(in), reference);
  }
}

TEST(Reduce, LabelIsSmallestSeen) {
  const auto out = reduce_by_contributor({{1, 5, "zeta", 1.0}, {2, 5, "alpha", 1.0}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].label, "alpha");
}

TEST(PageviewWeighting, MultipliesByRequestCount) {
  Page p;
  const std::vector<RevisionScore> s = {{1, 1, "u", 2.0}, {2, 1, "u", 3.0}};
  auto zero = pageview_weighted(s, p);
  EXPECT_EQ(zero[0].score, 0.0);
  EXPECT_EQ(zero[1].score, 0.0);
  p.pageview = Pageview{"aa", "T", 10, 0};
  auto ten = pageview_weighted(s, p);
  EXPECT_EQ(ten[0].score, 20.0);
  EXPECT_EQ(ten[1].score, 30.0);
  p.pageview->request_count = 1;
  EXPECT_EQ(pageview_weighted(s, p), s);
}

TEST(Lcs, LengthMatchesDynamicProgramming) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 400; ++trial) {
    const auto a = random_symbols(rng, rng() % 200, 1 + static_cast<std::uint32_t>(rng() % 6));
    const auto b = random_symbols(rng, rng() % 200, 1 + static_cast<std::uint32_t>(rng() % 6));
    ASSERT_EQ(lcs::length(a, b), dp_lcs(a, b)) << "trial " << trial;
  }
}

TEST(Lcs, AlignmentIsMaximalAndConsistent) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_symbols(rng, rng() % 150, 1 + static_cast<std::uint32_t>(rng() % 5));
    const auto b = random_symbols(rng, rng() % 150, 1 + static_cast<std::uint32_t>(rng() % 5));
    const auto matched = lcs::matched_in_newer(a, b);
    std::vector<lcs::Symbol> kept;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (matched[k]) kept.push_back(b[k]);
    }
    // The matched newer tokens form a common subsequence of maximum length.
    ASSERT_EQ(kept.size(), dp_lcs(a, b));
    ASSERT_EQ(dp_lcs(a, kept), kept.size());
  }
}

TEST(Lcs, CheckpointedRowsGiveSameAlignment) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = random_symbols(rng, 50 + rng() % 300, 3);
    const auto b = random_symbols(rng, 50 + rng() % 300, 3);
    ASSERT_EQ(lcs::detail::matched_in_newer(a, b, 0), lcs::matched_in_newer(a, b)) << "trial " << trial;
  }
}

TEST(Lcs, AlignmentMatchesBruteForceOnSmallInputs) {
  std::mt19937_64 rng(4);
  const std::vector<std::string> words = {"a", "b", "c"};
  for (int trial = 0; trial < 2000; ++trial) {
    TokenSeq x, y;
    for (std::size_t k = rng() % 8; k > 0; --k) x.push_back(words[rng() % 3]);
    for (std::size_t k = rng() % 8; k > 0; --k) y.push_back(words[rng() % 3]);
    const auto d = word_diff(x, y);
    const auto o = oracle::brute_diff(x, y);
    ASSERT_EQ(d.added_tokens, o.added);
    ASSERT_EQ(d.deleted, x.size() - o.common);
  }
}

TEST(Lcs, LongTextsWithSmallEdits) {
  std::mt19937_64 rng(6);
  auto a = random_symbols(rng, 20000, 5000);
  auto b = a;
  b[100] = 99999;
  b[19000] = 99998;
  b.insert(b.begin() + 5000, 77777);
  EXPECT_EQ(lcs::length(a, b), 19998u);
  const auto m = lcs::matched_in_newer(a, b);
  EXPECT_EQ(std::count(m.begin(), m.end(), 0), 3);
}

TEST(MeasureProperties, SurvivalNeverExceedsInsertion) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const Page p = oracle::random_history(rng, 12, 15);
    const auto all = score_page_all(p, 1 + rng() % 10);
    for (std::size_t i = 0; i < p.revisions.size(); ++i) {
      const double txt = all[1][i].score;
      ASSERT_LE(all[3][i].score, txt + 1e-12);
      ASSERT_LE(all[5][i].score, txt);
      ASSERT_EQ(all[0][i].score, 1.0);
    }
  }
}

TEST(MeasureProperties, QualityStaysInRange) {
  std::mt19937_64 rng(10);
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  auto random_seq = [&] {
    TokenSeq s;
    for (std::size_t k = rng() % 10; k > 0; --k) s.push_back(words[rng() % words.size()]);
    return s;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto q = edit_quality(random_seq(), random_seq(), random_seq());
    if (q) {
      ASSERT_GE(*q, -1.0);
      ASSERT_LE(*q, 1.0);
    }
  }
}

TEST(MeasureOracle, MatchesBruteForceOnSmallHistories) {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 600; ++trial) {
    const Page p = oracle::random_history(rng, 5, 6);
    const std::size_t judges = trial % 3 == 0 ? 1 + rng() % 4 : kDefaultJudges;
    std::vector<std::string> texts;
    for (const auto& r : p.revisions) texts.push_back(r.text);
    for (const Measure m : kAllMeasures) {
      const auto got = scores_of(p, m, judges);
      const auto want = oracle::brute_scores(texts, m, judges);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_NEAR(got[i], want[i], 1e-9) << measure_name(m) << " trial " << trial << " revision " << i;
      }
    }
  }
}
