#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wikimpact/model.hpp"

namespace wikimpact {

struct PageviewStats {
  /// Lines with the wrong field count, an empty field or non-numeric counts.
  std::size_t malformed_lines = 0;
  /// Titles kept verbatim because percent-decoding failed.
  std::size_t undecodable_titles = 0;

  PageviewStats& operator+=(const PageviewStats& o) {
    malformed_lines += o.malformed_lines;
    undecodable_titles += o.undecodable_titles;
    return *this;
  }
};

/// True for a wiki tag with an optional project suffix from
/// {.b, .d, .m, .mw, .n, .q, .s, .v, .w}, e.g. "aa", "bg.d", "en.m".
bool is_valid_project_tag(std::string_view tag);

/// '_' becomes ' ', then %XX escapes are decoded. Returns nullopt when an
/// escape is incomplete or the result is not valid UTF-8. '+' is kept.
std::optional<std::string> decode_title(std::string_view raw);

/// Parses "<project> <title> <count> <size>" (fields separated by single
/// spaces; a trailing CR is ignored). Malformed lines yield nullopt.
std::optional<Pageview> parse_pageview_line(std::string_view line, PageviewStats* stats = nullptr);

/// Keeps records whose project equals `project` exactly (all records when
/// absent), then sums counts and sizes per (project, title). The result is
/// sorted by (project, title).
std::vector<Pageview> aggregate_pageviews(std::vector<Pageview> views,
                                          const std::optional<std::string>& project);

/// Title lookup over aggregated views; views sharing a title (possible when
/// aggregated across projects) are summed.
class PageviewIndex {
 public:
  explicit PageviewIndex(const std::vector<Pageview>& views);

  /// Sets `page.pageview` to the view of its title, or clears it.
  void attach(Page& page) const;

  std::size_t size() const noexcept { return by_title_.size(); }

 private:
  std::unordered_map<std::string, Pageview> by_title_;
};

/// Left outer join on the decoded title: every page is returned once, with
/// `pageview` set iff a view of the same title exists. Views sharing a title
/// (possible when aggregated across projects) are summed.
std::vector<Page> join_pages_with_views(std::vector<Page> pages, const std::vector<Pageview>& views);

/// Reads one pageview file (plain, .gz or .bz2) or every regular file of a
/// directory, filters by project and aggregates. Files are parsed on up to
/// `parallelism` threads; the result does not depend on it.
std::vector<Pageview> load_pageviews(const std::filesystem::path& path,
                                     const std::optional<std::string>& project,
                                     PageviewStats* stats = nullptr, std::size_t parallelism = 1);

}  // namespace wikimpact
