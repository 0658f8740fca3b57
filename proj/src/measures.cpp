#include "wikimpact/measures.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "wikimpact/error.hpp"
#include "wikimpact/lcs.hpp"

namespace wikimpact {
namespace {

using lcs::Symbol;
using SymbolSeq = std::vector<Symbol>;

/// Length in bytes of the White_Space character starting at s[i], or 0.
std::size_t whitespace_at(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || (c >= 0x09 && c <= 0x0D)) return 1;
  if (c < 0xC2 || i + 1 >= s.size()) return 0;
  const auto c1 = static_cast<unsigned char>(s[i + 1]);
  if (c == 0xC2) return (c1 == 0x85 || c1 == 0xA0) ? 2 : 0;
  if (i + 2 >= s.size()) return 0;
  const auto c2 = static_cast<unsigned char>(s[i + 2]);
  switch (c) {
    case 0xE1:  // U+1680
      return (c1 == 0x9A && c2 == 0x80) ? 3 : 0;
    case 0xE2:  // U+2000..U+200A, U+2028, U+2029, U+202F, U+205F
      if (c1 == 0x80) return (c2 <= 0x8A || c2 == 0xA8 || c2 == 0xA9 || c2 == 0xAF) && c2 >= 0x80 ? 3 : 0;
      return (c1 == 0x81 && c2 == 0x9F) ? 3 : 0;
    case 0xE3:  // U+3000
      return (c1 == 0x80 && c2 == 0x80) ? 3 : 0;
    default:
      return 0;
  }
}

template <typename Emit>
void for_each_token(std::string_view text, Emit emit) {
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t ws = whitespace_at(text, i);
    if (ws == 0) {
      ++i;
      continue;
    }
    if (i > start) emit(text.substr(start, i - start));
    i += ws;
    start = i;
  }
  if (i > start) emit(text.substr(start, i - start));
}

/// Maps tokens to dense symbols; views must outlive the table.
class Interner {
 public:
  Symbol intern(std::string_view token) {
    const auto [it, fresh] = ids_.try_emplace(token, static_cast<Symbol>(ids_.size()));
    return it->second;
  }

  SymbolSeq intern_all(const std::vector<std::string>& tokens) {
    SymbolSeq out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(intern(t));
    return out;
  }

 private:
  std::unordered_map<std::string_view, Symbol> ids_;
};

std::size_t distance(std::span<const Symbol> a, std::span<const Symbol> b) {
  const std::size_t l = lcs::length(a, b);
  return std::max(a.size() - l, b.size() - l);
}

std::optional<double> quality(std::size_t d_prev_judge, std::size_t d_cur_judge, std::size_t d_prev_cur) {
  if (d_prev_cur == 0) return std::nullopt;
  const double q = (static_cast<double>(d_prev_judge) - static_cast<double>(d_cur_judge)) /
                   static_cast<double>(d_prev_cur);
  return std::clamp(q, -1.0, 1.0);
}

using SymbolCounts = std::vector<std::pair<Symbol, std::uint32_t>>;

SymbolCounts count_symbols(SymbolSeq seq) {
  std::sort(seq.begin(), seq.end());
  SymbolCounts out;
  for (const Symbol s : seq) {
    if (!out.empty() && out.back().first == s) {
      ++out.back().second;
    } else {
      out.emplace_back(s, 1);
    }
  }
  return out;
}

std::size_t live(const SymbolCounts& added, const SymbolCounts& future) {
  std::size_t total = 0;
  auto it = future.begin();
  for (const auto& [s, c] : added) {
    it = std::lower_bound(it, future.end(), std::make_pair(s, std::uint32_t{0}));
    if (it == future.end()) break;
    if (it->first == s) total += std::min(c, it->second);
  }
  return total;
}

/// Lazily computed per-page state shared by all measures.
class PageScorer {
 public:
  PageScorer(const Page& page, std::size_t judges) : page_(page), judges_(judges) {
    if (judges == 0) throw ConfigError("the number of judges must be positive");
    Interner interner;
    seqs_.reserve(page.revisions.size());
    for (const auto& r : page.revisions) {
      SymbolSeq seq;
      for_each_token(r.text, [&](std::string_view t) { seq.push_back(interner.intern(t)); });
      seqs_.push_back(std::move(seq));
    }
    diffs_.resize(seqs_.size());
    counts_.resize(seqs_.size());
  }

  std::size_t size() const { return seqs_.size(); }

  double score(Measure m, std::size_t i) {
    switch (m) {
      case Measure::NumEdits:
        return 1.0;
      case Measure::TextOnly:
        return static_cast<double>(diff(i).inserted);
      case Measure::EditOnly:
        return static_cast<double>(dist(i - 1, i));
      case Measure::TextLongevity:
        return text_longevity(i);
      case Measure::EditLongevity:
        return edit_longevity(i);
      case Measure::TenRevisions:
        return ten_revisions(i);
      case Measure::TextLongevityWithPenalty:
        return text_longevity(i) + std::min(0.0, edit_longevity(i));
    }
    return 0.0;
  }

 private:
  struct Diff {
    bool ready = false;
    std::size_t inserted = 0;
    SymbolCounts added;
  };

  static constexpr std::size_t kEmpty = static_cast<std::size_t>(-1);

  std::span<const Symbol> seq(std::size_t i) const {
    return i == kEmpty ? std::span<const Symbol>() : std::span<const Symbol>(seqs_[i]);
  }

  std::size_t followers(std::size_t i) const { return seqs_.size() - 1 - i; }

  const Diff& diff(std::size_t i) {
    Diff& d = diffs_[i];
    if (!d.ready) {
      const auto older = seq(i - 1);
      const auto newer = seq(i);
      const auto matched = lcs::matched_in_newer(older, newer);
      SymbolSeq added;
      for (std::size_t k = 0; k < newer.size(); ++k) {
        if (!matched[k]) added.push_back(newer[k]);
      }
      d.inserted = added.size();
      d.added = count_symbols(std::move(added));
      d.ready = true;
    }
    return d;
  }

  const SymbolCounts& counts(std::size_t i) {
    auto& c = counts_[i];
    if (!c) c = count_symbols(seqs_[i]);
    return *c;
  }

  /// Word edit distance between revisions a and b; kEmpty is the empty text.
  std::size_t dist(std::size_t a, std::size_t b) {
    if (a == kEmpty) return seqs_[b].size();
    const auto key = std::make_pair(a, b);
    const auto it = distances_.find(key);
    if (it != distances_.end()) return it->second;
    const std::size_t d = distance(seq(a), seq(b));
    distances_.emplace(key, d);
    return d;
  }

  double text_longevity(std::size_t i) {
    const Diff& d = diff(i);
    if (d.inserted == 0) return 0.0;
    const std::size_t k_max = std::min(judges_, followers(i));
    if (k_max == 0) return static_cast<double>(d.inserted);
    std::size_t survived = 0;
    for (std::size_t k = 1; k <= k_max; ++k) survived += live(d.added, counts(i + k));
    return static_cast<double>(survived) / static_cast<double>(k_max);
  }

  double edit_longevity(std::size_t i) {
    const std::size_t e = dist(i - 1, i);
    const std::size_t k_max = std::min(judges_, followers(i));
    if (e == 0 || k_max == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      sum += *quality(dist(i - 1, i + k), dist(i, i + k), e);
    }
    return static_cast<double>(e) * (sum / static_cast<double>(k_max));
  }

  double ten_revisions(std::size_t i) {
    const std::size_t f = followers(i);
    const Diff& d = diff(i);
    if (f == 0 || d.inserted == 0) return 0.0;
    return static_cast<double>(live(d.added, counts(i + std::min(kTenRevisionsLookahead, f))));
  }

  const Page& page_;
  std::size_t judges_;
  std::vector<SymbolSeq> seqs_;
  std::vector<Diff> diffs_;
  std::vector<std::optional<SymbolCounts>> counts_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> distances_;
};

RevisionScore make_score(const Revision& r, double score) {
  return {r.id, identifier(r.contributor), std::string(r.contributor.identity_string()), score};
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  for_each_token(text, [&](std::string_view t) { out.emplace_back(t); });
  return out;
}

WordDiff word_diff(const TokenSeq& older, const TokenSeq& newer) {
  Interner interner;
  const SymbolSeq a = interner.intern_all(older);
  const SymbolSeq b = interner.intern_all(newer);
  const auto matched = lcs::matched_in_newer(a, b);
  WordDiff d;
  std::size_t common = 0;
  for (std::size_t k = 0; k < newer.size(); ++k) {
    if (matched[k]) {
      ++common;
    } else {
      d.added_tokens.push_back(newer[k]);
    }
  }
  d.inserted = newer.size() - common;
  d.deleted = older.size() - common;
  return d;
}

double edit_distance(const TokenSeq& a, const TokenSeq& b) {
  Interner interner;
  return static_cast<double>(distance(interner.intern_all(a), interner.intern_all(b)));
}

std::optional<double> edit_quality(const TokenSeq& prev, const TokenSeq& cur, const TokenSeq& judge) {
  Interner interner;
  const SymbolSeq p = interner.intern_all(prev);
  const SymbolSeq c = interner.intern_all(cur);
  const SymbolSeq j = interner.intern_all(judge);
  return quality(distance(p, j), distance(c, j), distance(p, c));
}

std::size_t live_tokens(const std::vector<std::string>& added, const TokenSeq& future) {
  std::unordered_map<std::string_view, std::size_t> available;
  for (const auto& t : future) ++available[t];
  std::size_t total = 0;
  for (const auto& t : added) {
    const auto it = available.find(t);
    if (it != available.end() && it->second > 0) {
      --it->second;
      ++total;
    }
  }
  return total;
}

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::NumEdits:
      return "num-edits";
    case Measure::TextOnly:
      return "text-only";
    case Measure::EditOnly:
      return "edit-only";
    case Measure::TextLongevity:
      return "text-longevity";
    case Measure::EditLongevity:
      return "edit-longevity";
    case Measure::TenRevisions:
      return "ten-revisions";
    case Measure::TextLongevityWithPenalty:
      return "text-longevity-with-penalty";
  }
  return "";
}

Measure parse_measure(std::string_view name) {
  for (const Measure m : kAllMeasures) {
    if (measure_name(m) == name) return m;
  }
  throw ConfigError("unknown measure '" + std::string(name) + "'");
}

std::vector<RevisionScore> score_page(const Page& page, Measure measure, std::size_t judges) {
  PageScorer scorer(page, judges);
  std::vector<RevisionScore> out;
  out.reserve(scorer.size());
  for (std::size_t i = 0; i < scorer.size(); ++i) {
    out.push_back(make_score(page.revisions[i], scorer.score(measure, i)));
  }
  return out;
}

std::array<std::vector<RevisionScore>, 7> score_page_all(const Page& page, std::size_t judges) {
  PageScorer scorer(page, judges);
  std::array<std::vector<RevisionScore>, 7> out;
  for (std::size_t m = 0; m < kAllMeasures.size(); ++m) {
    out[m].reserve(scorer.size());
    for (std::size_t i = 0; i < scorer.size(); ++i) {
      out[m].push_back(make_score(page.revisions[i], scorer.score(kAllMeasures[m], i)));
    }
  }
  return out;
}

std::vector<RevisionScore> pageview_weighted(std::vector<RevisionScore> scores, const Page& page) {
  const double factor = page.pageview ? static_cast<double>(page.pageview->request_count) : 0.0;
  for (auto& s : scores) s.score *= factor;
  return scores;
}

std::vector<RelevanceScore> reduce_by_contributor(std::vector<RevisionScore> scores) {
  std::sort(scores.begin(), scores.end(), [](const RevisionScore& a, const RevisionScore& b) {
    return std::tie(a.contributor_id, a.revision_id, a.score, a.label) <
           std::tie(b.contributor_id, b.revision_id, b.score, b.label);
  });
  std::vector<RelevanceScore> out;
  for (std::size_t i = 0; i < scores.size();) {
    std::size_t j = i;
    double sum = 0.0;
    const std::string* label = &scores[i].label;
    for (; j < scores.size() && scores[j].contributor_id == scores[i].contributor_id; ++j) {
      sum += scores[j].score;
      if (scores[j].label < *label) label = &scores[j].label;
    }
    out.emplace_back(scores[i].contributor_id, *label, sum);
    i = j;
  }
  return out;
}

}  // namespace wikimpact
