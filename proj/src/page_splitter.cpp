#include "wikimpact/page_splitter.hpp"

#include <algorithm>
#include <functional>

#include "wikimpact/error.hpp"

namespace wikimpact {
namespace {

constexpr std::string_view kOpen = "<page";
constexpr std::string_view kClose = "</page>";

std::string title_hint(std::string_view xml) {
  const auto open = xml.find("<title>");
  if (open == std::string_view::npos) return "<unknown title>";
  const auto begin = open + 7;
  const auto end = xml.find("</title>", begin);
  if (end == std::string_view::npos || end - begin > 512) return "<unknown title>";
  return std::string(xml.substr(begin, end - begin));
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void PageSplitter::feed(std::string_view chunk) {
  if (head_ > 0) {
    buffer_.erase(0, head_);
    scan_ -= head_;
    page_start_ = in_page_ ? page_start_ - head_ : 0;
    head_ = 0;
  }
  buffer_.append(chunk);
}

void PageSplitter::check_size() const {
  if (buffer_.size() - page_start_ > max_record_bytes_) {
    throw UnsplittableRecord("page record exceeds " + std::to_string(max_record_bytes_) +
                             " bytes (title: " +
                             title_hint(std::string_view(buffer_).substr(page_start_)) + ")");
  }
}

std::optional<RawPageRecord> PageSplitter::next() {
  const std::string_view view(buffer_);
  for (;;) {
    if (!in_page_) {
      const auto pos = view.find(kOpen, scan_);
      if (pos == std::string_view::npos) {
        // Keep a possible partial "<page" at the tail for the next chunk.
        scan_ = view.size() >= kOpen.size() ? view.size() - kOpen.size() + 1 : 0;
        scan_ = std::max(scan_, head_);
        head_ = scan_;
        return std::nullopt;
      }
      if (pos + kOpen.size() >= view.size()) {
        scan_ = head_ = pos;
        return std::nullopt;
      }
      const char follow = view[pos + kOpen.size()];
      if (follow != '>' && follow != ' ') {
        scan_ = head_ = pos + 1;
        continue;
      }
      in_page_ = true;
      page_start_ = head_ = pos;
      scan_ = pos + kOpen.size();
    }

    const auto end = view.find(kClose, scan_);
    if (end == std::string_view::npos) {
      check_size();
      scan_ = std::max(page_start_ + kOpen.size(),
                       view.size() >= kClose.size() ? view.size() - kClose.size() + 1 : 0);
      return std::nullopt;
    }
    const auto stop = end + kClose.size();
    if (stop - page_start_ > max_record_bytes_) check_size();
    RawPageRecord record{std::string(view.substr(page_start_, stop - page_start_))};
    in_page_ = false;
    head_ = scan_ = stop;
    return record;
  }
}

void PageSplitter::finish() const {
  if (in_page_) {
    throw UnterminatedPage("input ended inside page '" +
                           title_hint(std::string_view(buffer_).substr(page_start_)) + "'");
  }
}

std::vector<RawPageRecord> split_pages(std::string_view dump) {
  PageSplitter splitter;
  splitter.feed(dump);
  std::vector<RawPageRecord> records;
  while (auto r = splitter.next()) records.push_back(std::move(*r));
  splitter.finish();
  return records;
}

bool RecordDeduplicator::first_occurrence(std::string_view xml) {
  const Key key{xml.size(), std::hash<std::string_view>{}(xml), fnv1a(xml)};
  if (seen_.insert(key).second) return true;
  ++duplicates_;
  return false;
}

std::vector<RawPageRecord> dedup_records(std::vector<RawPageRecord> records) {
  RecordDeduplicator seen;
  std::vector<RawPageRecord> out;
  out.reserve(records.size());
  for (auto& r : records) {
    if (seen.first_occurrence(r.xml)) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace wikimpact
