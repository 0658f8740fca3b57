#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace wikimpact {

/// One complete "<page>...</page>" fragment of a dump.
struct RawPageRecord {
  std::string xml;

  bool operator==(const RawPageRecord&) const = default;
};

inline constexpr std::size_t kMaxRecordBytes = std::size_t{2} * 1024 * 1024 * 1024;

/// Incremental splitter that cuts a decompressed dump into page records by
/// matching the literal byte sequences "<page>" / "<page " and "</page>".
/// Content outside pages (the mediawiki wrapper, siteinfo) is discarded.
class PageSplitter {
 public:
  explicit PageSplitter(std::size_t max_record_bytes = kMaxRecordBytes)
      : max_record_bytes_(max_record_bytes) {}

  void feed(std::string_view chunk);

  /// Next complete record among the bytes fed so far. Throws
  /// UnsplittableRecord when a page grows beyond the record limit.
  std::optional<RawPageRecord> next();

  /// Declares end of input. Throws UnterminatedPage if a page is still open.
  void finish() const;

 private:
  void check_size() const;

  std::string buffer_;
  std::size_t head_ = 0;
  std::size_t scan_ = 0;
  std::size_t page_start_ = 0;
  bool in_page_ = false;
  std::size_t max_record_bytes_;
};

/// Splits a complete in-memory dump.
std::vector<RawPageRecord> split_pages(std::string_view dump);

/// Remembers every record it has seen and reports whether a record is new.
/// Records are keyed by length plus two independent 64-bit hashes of their
/// bytes, so memory stays proportional to the record count.
class RecordDeduplicator {
 public:
  bool first_occurrence(std::string_view xml);
  std::size_t duplicates() const noexcept { return duplicates_; }

 private:
  struct Key {
    std::size_t size;
    std::uint64_t h1;
    std::uint64_t h2;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept { return static_cast<std::size_t>(k.h1); }
  };

  std::unordered_set<Key, KeyHash> seen_;
  std::size_t duplicates_ = 0;
};

/// Drops exact duplicates, keeping first occurrences in their original order.
std::vector<RawPageRecord> dedup_records(std::vector<RawPageRecord> records);

}  // namespace wikimpact
