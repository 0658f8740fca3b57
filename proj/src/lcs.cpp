#include "wikimpact/lcs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace wikimpact::lcs {
namespace {

using Word = std::uint64_t;
constexpr std::size_t kBits = 64;

std::size_t words_for(std::size_t bits) { return (bits + kBits - 1) / kBits; }

struct Trimmed {
  std::size_t prefix = 0;
  std::size_t suffix = 0;
  std::span<const Symbol> a;
  std::span<const Symbol> b;
};

Trimmed trim(std::span<const Symbol> a, std::span<const Symbol> b) {
  Trimmed t;
  const std::size_t limit = std::min(a.size(), b.size());
  while (t.prefix < limit && a[t.prefix] == b[t.prefix]) ++t.prefix;
  while (t.suffix < limit - t.prefix && a[a.size() - 1 - t.suffix] == b[b.size() - 1 - t.suffix]) {
    ++t.suffix;
  }
  t.a = a.subspan(t.prefix, a.size() - t.prefix - t.suffix);
  t.b = b.subspan(t.prefix, b.size() - t.prefix - t.suffix);
  return t;
}

/// Match masks of the bit-side sequence, built one symbol at a time into a
/// scratch vector that is cleared after use.
class MatchIndex {
 public:
  /// `bit_of(k)` is the bit position of bits_side[k].
  template <typename BitOf>
  MatchIndex(std::span<const Symbol> bits_side, BitOf bit_of) {
    entries_.reserve(bits_side.size());
    for (std::size_t k = 0; k < bits_side.size(); ++k) {
      entries_.push_back({bits_side[k], static_cast<std::uint32_t>(bit_of(k))});
    }
    std::sort(entries_.begin(), entries_.end());
  }

  /// Sets the bits of `s` in `mask`; returns the touched range for clear().
  std::pair<std::size_t, std::size_t> fill(Symbol s, std::vector<Word>& mask) const {
    const auto lo = std::lower_bound(entries_.begin(), entries_.end(), Entry{s, 0});
    auto hi = lo;
    for (; hi != entries_.end() && hi->symbol == s; ++hi) {
      mask[hi->bit / kBits] |= Word{1} << (hi->bit % kBits);
    }
    return {static_cast<std::size_t>(lo - entries_.begin()), static_cast<std::size_t>(hi - entries_.begin())};
  }

  void clear(std::pair<std::size_t, std::size_t> range, std::vector<Word>& mask) const {
    for (std::size_t k = range.first; k < range.second; ++k) mask[entries_[k].bit / kBits] = 0;
  }

 private:
  struct Entry {
    Symbol symbol;
    std::uint32_t bit;
    auto operator<=>(const Entry&) const = default;
  };
  std::vector<Entry> entries_;
};

/// V <- (V + (V & M)) | (V & ~M), with carries across words. After feeding
/// the first k symbols of the row side, the number of zero bits among the
/// first l bits of V is the LCS of those k symbols and the first l bits.
void advance(std::vector<Word>& v, const std::vector<Word>& m) {
  Word carry = 0;
  for (std::size_t w = 0; w < v.size(); ++w) {
    const Word x = v[w];
    const Word u = x & m[w];
    const Word s = x + u;
    const Word c1 = s < x ? 1 : 0;
    const Word t = s + carry;
    const Word c2 = t < s ? 1 : 0;
    v[w] = t | (x & ~m[w]);
    carry = c1 | c2;
  }
}

std::size_t middle_length(std::span<const Symbol> a, std::span<const Symbol> b) {
  if (a.empty() || b.empty()) return 0;
  if (b.size() > a.size()) std::swap(a, b);
  const MatchIndex index(b, [](std::size_t k) { return k; });
  std::vector<Word> v(words_for(b.size()), ~Word{0});
  std::vector<Word> m(v.size(), 0);
  for (const Symbol s : a) {
    const auto range = index.fill(s, m);
    if (range.first == range.second) continue;
    advance(v, m);
    index.clear(range, m);
  }
  std::size_t ones = 0;
  for (std::size_t w = 0; w + 1 < v.size(); ++w) ones += std::popcount(v[w]);
  const std::size_t tail = b.size() - (v.size() - 1) * kBits;
  const Word tail_mask = tail == kBits ? ~Word{0} : (Word{1} << tail) - 1;
  ones += std::popcount(v.back() & tail_mask);
  return b.size() - ones;
}

/// Rows of the suffix table S(i, j) = LCS(older[i:], newer[j:]) for the
/// middle parts. Row k holds V after feeding older[n-1], ..., older[n-k]
/// against newer reversed, plus per-word prefix popcounts.
class SuffixRows {
 public:
  SuffixRows(std::span<const Symbol> older, std::span<const Symbol> newer, std::size_t budget)
      : older_(older),
        m_(newer.size()),
        words_(words_for(newer.size())),
        index_(newer, [m = newer.size()](std::size_t k) { return m - 1 - k; }),
        scratch_(words_, 0) {
    const std::size_t n = older.size();
    const std::size_t row_bytes = words_ * sizeof(Word) + (words_ + 1) * sizeof(std::uint32_t);
    if ((n + 1) * row_bytes <= budget) {
      stride_ = n + 1;
    } else {
      stride_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
    }
    std::vector<Word> v(words_, ~Word{0});
    for (std::size_t k = 0; k <= n; ++k) {
      if (k % stride_ == 0) checkpoints_.push_back(v);
      if (k < n) step(v, k);
    }
    if (stride_ == n + 1) {
      // Everything fits: materialise all rows now.
      load_block(0);
    }
  }

  /// S(i, j) for the middle parts.
  std::size_t at(std::size_t i, std::size_t j) {
    const std::size_t k = older_.size() - i;
    const std::size_t l = m_ - j;
    ensure(k);
    const std::size_t r = k - block_start_;
    const Word* v = &bits_[r * words_];
    const std::uint32_t* cum = &cum_[r * (words_ + 1)];
    std::size_t ones = cum[l / kBits];
    if (l % kBits != 0) ones += std::popcount(v[l / kBits] & ((Word{1} << (l % kBits)) - 1));
    return l - ones;
  }

  /// Hint that rows k and k-1 will be read next; keeps both in one block.
  void prepare_pair(std::size_t i) {
    const std::size_t k = older_.size() - i;
    if (k == 0) return;
    ensure_block((k - 1) / stride_);
  }

 private:
  void step(std::vector<Word>& v, std::size_t k) {
    const Symbol s = older_[older_.size() - 1 - k];
    const auto range = index_.fill(s, scratch_);
    if (range.first != range.second) {
      advance(v, scratch_);
      index_.clear(range, scratch_);
    }
  }

  void ensure(std::size_t k) {
    if (loaded_ && k >= block_start_ && k <= block_end_) return;
    ensure_block(std::min(k / stride_, (older_.size()) / stride_));
  }

  void ensure_block(std::size_t b) {
    if (loaded_ && block_ == b) return;
    load_block(b);
  }

  void load_block(std::size_t b) {
    const std::size_t n = older_.size();
    block_ = b;
    block_start_ = b * stride_;
    block_end_ = std::min(n, block_start_ + stride_);
    const std::size_t rows = block_end_ - block_start_ + 1;
    bits_.assign(rows * words_, 0);
    cum_.assign(rows * (words_ + 1), 0);
    std::vector<Word> v = checkpoints_[b];
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(v.begin(), v.end(), bits_.begin() + static_cast<std::ptrdiff_t>(r * words_));
      std::uint32_t* cum = &cum_[r * (words_ + 1)];
      for (std::size_t w = 0; w < words_; ++w) cum[w + 1] = cum[w] + static_cast<std::uint32_t>(std::popcount(v[w]));
      if (block_start_ + r < block_end_) step(v, block_start_ + r);
    }
    loaded_ = true;
  }

  std::span<const Symbol> older_;
  std::size_t m_;
  std::size_t words_;
  MatchIndex index_;
  std::vector<Word> scratch_;
  std::size_t stride_ = 1;
  std::vector<std::vector<Word>> checkpoints_;
  bool loaded_ = false;
  std::size_t block_ = 0;
  std::size_t block_start_ = 0;
  std::size_t block_end_ = 0;
  std::vector<Word> bits_;
  std::vector<std::uint32_t> cum_;
};

}  // namespace

std::size_t length(std::span<const Symbol> a, std::span<const Symbol> b) {
  const Trimmed t = trim(a, b);
  return t.prefix + t.suffix + middle_length(t.a, t.b);
}

std::vector<char> matched_in_newer(std::span<const Symbol> older, std::span<const Symbol> newer) {
  return detail::matched_in_newer(older, newer, kFullRowBudgetBytes);
}

namespace detail {

std::vector<char> matched_in_newer(std::span<const Symbol> older, std::span<const Symbol> newer,
                                   std::size_t row_budget_bytes) {
  const Trimmed t = trim(older, newer);
  std::vector<char> matched(newer.size(), 0);
  std::fill_n(matched.begin(), t.prefix, 1);
  std::fill(matched.end() - static_cast<std::ptrdiff_t>(t.suffix), matched.end(), 1);
  if (t.a.empty() || t.b.empty()) return matched;

  SuffixRows rows(t.a, t.b, row_budget_bytes);
  const std::size_t n = t.a.size();
  const std::size_t m = t.b.size();
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t remaining = rows.at(0, 0);
  // Greedy walk: take newer[j] as soon as some maximum alignment of the
  // remaining suffixes can match it; skip older[i] while that keeps the
  // remaining LCS; otherwise newer[j] is unmatched in every such alignment.
  while (remaining > 0 && i < n && j < m) {
    rows.prepare_pair(i);
    if (t.a[i] == t.b[j] && rows.at(i + 1, j + 1) + 1 == remaining) {
      matched[t.prefix + j] = 1;
      ++i;
      ++j;
      --remaining;
    } else if (rows.at(i + 1, j) == remaining) {
      ++i;
    } else {
      ++j;
    }
  }
  return matched;
}

}  // namespace detail
}  // namespace wikimpact::lcs
