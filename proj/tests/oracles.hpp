#pragma once

// Independent reference implementations and random generators used by the
// property suites and the acceptance binary. Everything here is written for
// clarity over speed and shares no code with the library beyond the data
// model.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wikimpact/measures.hpp"
#include "wikimpact/model.hpp"

namespace wikimpact::oracle {

using Words = std::vector<std::string>;

inline Words split_words(const std::string& text) {
  std::istringstream in(text);
  Words out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct Diff {
  std::size_t common = 0;
  Words added;
};

/// Common prefix and suffix are matched; the middle takes the maximum
/// alignment with the lexicographically smallest list of newer indices,
/// found by enumerating every subset of newer positions.
inline Diff brute_diff(const Words& older, const Words& newer) {
  std::size_t p = 0;
  while (p < older.size() && p < newer.size() && older[p] == newer[p]) ++p;
  std::size_t s = 0;
  while (s < older.size() - p && s < newer.size() - p && older[older.size() - 1 - s] == newer[newer.size() - 1 - s]) {
    ++s;
  }
  const Words a(older.begin() + static_cast<std::ptrdiff_t>(p), older.end() - static_cast<std::ptrdiff_t>(s));
  const Words b(newer.begin() + static_cast<std::ptrdiff_t>(p), newer.end() - static_cast<std::ptrdiff_t>(s));

  auto is_subsequence = [&](const std::vector<std::size_t>& idx) {
    std::size_t k = 0;
    for (const auto& w : a) {
      if (k < idx.size() && b[idx[k]] == w) ++k;
    }
    return k == idx.size();
  };

  std::vector<std::size_t> best;
  bool found = false;
  for (std::uint32_t mask = 0; mask < (1u << b.size()); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (mask & (1u << k)) idx.push_back(k);
    }
    if (!is_subsequence(idx)) continue;
    if (!found || idx.size() > best.size() || (idx.size() == best.size() && idx < best)) {
      best = idx;
      found = true;
    }
  }

  Diff d;
  d.common = p + s + best.size();
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (!std::binary_search(best.begin(), best.end(), k)) d.added.push_back(b[k]);
  }
  return d;
}

inline double brute_distance(const Words& a, const Words& b) {
  const std::size_t l = brute_diff(a, b).common;
  return static_cast<double>(std::max(a.size() - l, b.size() - l));
}

inline std::optional<double> brute_quality(const Words& prev, const Words& cur, const Words& judge) {
  const double den = brute_distance(prev, cur);
  if (den == 0.0) return std::nullopt;
  const double q = (brute_distance(prev, judge) - brute_distance(cur, judge)) / den;
  return std::min(1.0, std::max(-1.0, q));
}

inline std::size_t brute_live(const Words& added, const Words& future) {
  std::map<std::string, int> pool;
  for (const auto& w : future) ++pool[w];
  std::size_t n = 0;
  for (const auto& w : added) {
    if (pool[w] > 0) {
      --pool[w];
      ++n;
    }
  }
  return n;
}

/// Per-revision scores of `measure` for a history of texts.
inline std::vector<double> brute_scores(const std::vector<std::string>& texts, Measure measure, std::size_t judges) {
  std::vector<Words> w;
  for (const auto& t : texts) w.push_back(split_words(t));
  const Words empty;
  const std::size_t n = w.size();
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Words& parent = i == 0 ? empty : w[i - 1];
    const Diff d = brute_diff(parent, w[i]);
    const double txt = static_cast<double>(d.added.size());
    const std::size_t followers = n - 1 - i;
    const std::size_t k_max = std::min(judges, followers);

    double tl = 0.0;
    if (txt > 0) {
      if (k_max == 0) {
        tl = txt;
      } else {
        double alpha = 0.0;
        for (std::size_t k = 1; k <= k_max; ++k) alpha += static_cast<double>(brute_live(d.added, w[i + k])) / txt;
        tl = txt * alpha / static_cast<double>(k_max);
      }
    }
    double el = 0.0;
    {
      double sum = 0.0;
      std::size_t defined = 0;
      for (std::size_t k = 1; k <= k_max; ++k) {
        if (auto q = brute_quality(parent, w[i], w[i + k])) {
          sum += *q;
          ++defined;
        }
      }
      if (defined > 0) el = brute_distance(parent, w[i]) * sum / static_cast<double>(defined);
    }

    switch (measure) {
      case Measure::NumEdits:
        out.push_back(1.0);
        break;
      case Measure::TextOnly:
        out.push_back(txt);
        break;
      case Measure::EditOnly:
        out.push_back(brute_distance(parent, w[i]));
        break;
      case Measure::TextLongevity:
        out.push_back(tl);
        break;
      case Measure::EditLongevity:
        out.push_back(el);
        break;
      case Measure::TenRevisions:
        out.push_back(followers == 0 || txt == 0
                          ? 0.0
                          : static_cast<double>(brute_live(d.added, w[i + std::min<std::size_t>(10, followers)])));
        break;
      case Measure::TextLongevityWithPenalty:
        out.push_back(tl + std::min(0.0, el));
        break;
    }
  }
  return out;
}

/// Author identity as stated by the skip rules: ids decide when both are
/// present, usernames otherwise; anonymous by IP; all deleted are one.
inline bool same_author(const Contributor& a, const Contributor& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == ContributorKind::Deleted) return true;
  if (a.kind == ContributorKind::Anonymous) return a.ip == b.ip;
  if (a.user_id.has_value() && b.user_id.has_value()) return *a.user_id == *b.user_id;
  return a.username == b.username;
}

/// Removes the earlier revision of the leftmost matching adjacent pair and
/// starts over until no pair matches.
inline std::vector<Revision> collapse_fixpoint(std::vector<Revision> revs) {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i + 1 < revs.size(); ++i) {
      if (same_author(revs[i].contributor, revs[i + 1].contributor)) {
        revs.erase(revs.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < revs.size(); ++i) revs[i].within_page_id = static_cast<std::uint32_t>(i + 1);
  return revs;
}

/// Small pool of authors so that collisions are frequent.
inline Contributor random_contributor(std::mt19937_64& rng) {
  static const std::vector<std::string> kNames = {"Ann", "Ben", "Cy", "Ann B", "Dee"};
  static const std::vector<std::string> kIps = {"10.0.0.1", "10.0.0.2", "2001:db8::7"};
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0:
      return Contributor::anonymous(kIps[rng() % kIps.size()]);
    case 1:
      return Contributor::deleted();
    case 2:
      return Contributor::registered(std::nullopt, kNames[rng() % kNames.size()]);
    case 3:
      return Contributor::registered(0, kNames[rng() % kNames.size()]);
    default:
      return Contributor::registered(1 + rng() % 3, kNames[rng() % kNames.size()]);
  }
}

/// History of up to `max_revs` revisions with up to `max_tokens` tokens drawn
/// from a four-word alphabet, separated by mixed ASCII whitespace.
inline Page random_history(std::mt19937_64& rng, std::size_t max_revs, std::size_t max_tokens,
                           std::uint64_t first_id = 1) {
  static const std::vector<std::string> kWords = {"a", "b", "c", "d"};
  static const std::vector<std::string> kSpaces = {" ", "  ", "\n", "\t"};
  Page p;
  p.id = first_id;
  p.title = "Synthetic " + std::to_string(first_id);
  const std::size_t n = 1 + rng() % max_revs;
  for (std::size_t i = 0; i < n; ++i) {
    Revision r;
    r.id = first_id * 100 + i;
    r.contributor = random_contributor(rng);
    const std::size_t len = rng() % (max_tokens + 1);
    for (std::size_t k = 0; k < len; ++k) {
      if (k > 0) r.text += kSpaces[rng() % kSpaces.size()];
      r.text += kWords[rng() % kWords.size()];
    }
    r.within_page_id = static_cast<std::uint32_t>(i + 1);
    p.revisions.push_back(std::move(r));
  }
  return p;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

/// Serialises pages in the MediaWiki export layout, one element per line.
inline std::string to_dump_xml(const std::vector<Page>& pages, const std::vector<bool>& redirects = {}) {
  std::string x = "<mediawiki xml:lang=\"en\">\n  <siteinfo>\n    <sitename>Synthetic</sitename>\n  </siteinfo>\n";
  for (std::size_t pi = 0; pi < pages.size(); ++pi) {
    const Page& p = pages[pi];
    x += "  <page>\n    <title>" + xml_escape(p.title) + "</title>\n    <ns>" + std::to_string(p.ns) +
         "</ns>\n    <id>" + std::to_string(p.id) + "</id>\n";
    if (pi < redirects.size() && redirects[pi]) x += "    <redirect title=\"Elsewhere\" />\n";
    for (const auto& r : p.revisions) {
      x += "    <revision>\n      <id>" + std::to_string(r.id) + "</id>\n";
      if (r.parent_id) x += "      <parentid>" + std::to_string(*r.parent_id) + "</parentid>\n";
      x += "      <timestamp>2017-05-01T00:00:00Z</timestamp>\n";
      const Contributor& c = r.contributor;
      if (c.kind == ContributorKind::Deleted) {
        x += "      <contributor deleted=\"deleted\" />\n";
      } else {
        x += "      <contributor>\n";
        if (c.kind == ContributorKind::Anonymous) {
          x += "        <ip>" + xml_escape(*c.ip) + "</ip>\n";
        } else {
          x += "        <username>" + xml_escape(*c.username) + "</username>\n";
          if (c.user_id) x += "        <id>" + std::to_string(*c.user_id) + "</id>\n";
        }
        x += "      </contributor>\n";
      }
      if (r.text.empty()) {
        x += "      <text xml:space=\"preserve\" />\n";
      } else {
        x += "      <text xml:space=\"preserve\">" + xml_escape(r.text) + "</text>\n";
      }
      x += "    </revision>\n";
    }
    x += "  </page>\n";
  }
  x += "</mediawiki>\n";
  return x;
}

}  // namespace wikimpact::oracle
