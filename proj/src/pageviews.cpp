#include "wikimpact/pageviews.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>

#include <spdlog/spdlog.h>

#include "wikimpact/decompress.hpp"
#include "wikimpact/error.hpp"
#include "wikimpact/parallel.hpp"

namespace wikimpact {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::array<char32_t, 5> kMin = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

template <typename Int>
bool parse_count(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && end == s.data() + s.size();
}

struct ViewKey {
  std::string project;
  std::string title;
  auto operator<=>(const ViewKey&) const = default;
};

using ViewTable = std::map<ViewKey, std::pair<std::uint64_t, std::uint64_t>>;

void accumulate(ViewTable& table, Pageview&& v) {
  auto& slot = table[ViewKey{std::move(v.project_name), std::move(v.page_title)}];
  slot.first += v.request_count;
  slot.second += v.request_size;
}

std::vector<Pageview> to_vector(ViewTable&& table) {
  std::vector<Pageview> out;
  out.reserve(table.size());
  for (auto& [key, sums] : table) {
    out.push_back({key.project, key.title, sums.first, sums.second});
  }
  return out;
}

ViewTable load_file(const std::filesystem::path& path, const std::optional<std::string>& project,
                    PageviewStats& stats) {
  ViewTable table;
  auto source = open_decompressed(path);
  std::string carry;
  auto handle_line = [&](std::string_view line) {
    if (line.empty() || line == "\r") return;
    // Filter on the raw first field before paying for title decoding.
    if (project && line.substr(0, line.find(' ')) != *project) return;
    if (auto v = parse_pageview_line(line, &stats)) accumulate(table, std::move(*v));
  };
  while (auto chunk = source->next()) {
    std::string_view view(*chunk);
    std::size_t start = 0;
    for (auto nl = view.find('\n'); nl != std::string_view::npos; nl = view.find('\n', start)) {
      if (carry.empty()) {
        handle_line(view.substr(start, nl - start));
      } else {
        carry.append(view.substr(start, nl - start));
        handle_line(carry);
        carry.clear();
      }
      start = nl + 1;
    }
    carry.append(view.substr(start));
  }
  handle_line(carry);
  return table;
}

}  // namespace

bool is_valid_project_tag(std::string_view tag) {
  const auto dot = tag.find('.');
  const auto wiki = tag.substr(0, dot);
  if (wiki.empty()) return false;
  for (char c : wiki) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  if (dot == std::string_view::npos) return true;
  static constexpr std::array<std::string_view, 9> kSuffixes = {".b", ".d", ".m", ".mw", ".n",
                                                                ".q", ".s", ".v", ".w"};
  const auto suffix = tag.substr(dot);
  return std::find(kSuffixes.begin(), kSuffixes.end(), suffix) != kSuffixes.end();
}

std::optional<std::string> decode_title(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '_') {
      out += ' ';
    } else if (c == '%') {
      if (i + 2 >= raw.size()) return std::nullopt;
      const int hi = hex_value(raw[i + 1]);
      const int lo = hex_value(raw[i + 2]);
      if (hi < 0 || lo < 0) return std::nullopt;
      out += static_cast<char>(hi * 16 + lo);
      i += 2;
    } else {
      out += c;
    }
  }
  if (!valid_utf8(out)) return std::nullopt;
  return out;
}

std::optional<Pageview> parse_pageview_line(std::string_view line, PageviewStats* stats) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::array<std::string_view, 4> fields;
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const auto sp = line.find(' ', start);
    const auto field = line.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start);
    if (n == fields.size()) {
      n = fields.size() + 1;
      break;
    }
    fields[n++] = field;
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }

  Pageview v;
  const bool ok = n == 4 && !fields[0].empty() && !fields[1].empty() &&
                  parse_count(fields[2], v.request_count) && parse_count(fields[3], v.request_size);
  if (!ok) {
    if (stats != nullptr) ++stats->malformed_lines;
    return std::nullopt;
  }
  v.project_name = std::string(fields[0]);
  if (auto title = decode_title(fields[1])) {
    v.page_title = std::move(*title);
  } else {
    if (stats != nullptr) ++stats->undecodable_titles;
    v.page_title = std::string(fields[1]);
    std::replace(v.page_title.begin(), v.page_title.end(), '_', ' ');
  }
  return v;
}

std::vector<Pageview> aggregate_pageviews(std::vector<Pageview> views,
                                          const std::optional<std::string>& project) {
  ViewTable table;
  for (auto& v : views) {
    if (project && v.project_name != *project) continue;
    accumulate(table, std::move(v));
  }
  return to_vector(std::move(table));
}

PageviewIndex::PageviewIndex(const std::vector<Pageview>& views) {
  by_title_.reserve(views.size());
  for (const auto& v : views) {
    auto [it, fresh] = by_title_.try_emplace(v.page_title, v);
    if (!fresh) {
      it->second.request_count += v.request_count;
      it->second.request_size += v.request_size;
    }
  }
}

void PageviewIndex::attach(Page& page) const {
  const auto it = by_title_.find(page.title);
  if (it != by_title_.end()) {
    page.pageview = it->second;
  } else {
    page.pageview.reset();
  }
}

std::vector<Page> join_pages_with_views(std::vector<Page> pages, const std::vector<Pageview>& views) {
  const PageviewIndex index(views);
  for (auto& p : pages) index.attach(p);
  return pages;
}

std::vector<Pageview> load_pageviews(const std::filesystem::path& path,
                                     const std::optional<std::string>& project, PageviewStats* stats,
                                     std::size_t parallelism) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw EmptyDirectory(path.string() + " contains no pageview files");
  } else if (std::filesystem::exists(path)) {
    files.push_back(path);
  } else {
    throw IoError("pageview input " + path.string() + " does not exist");
  }

  std::vector<ViewTable> tables(files.size());
  std::vector<PageviewStats> file_stats(files.size());
  parallel_for(parallelism, files.size(),
               [&](std::size_t i) { tables[i] = load_file(files[i], project, file_stats[i]); });

  ViewTable merged;
  PageviewStats total;
  for (std::size_t i = 0; i < files.size(); ++i) {
    total += file_stats[i];
    for (auto& [key, sums] : tables[i]) {
      auto& slot = merged[key];
      slot.first += sums.first;
      slot.second += sums.second;
    }
  }
  if (total.malformed_lines + total.undecodable_titles > 0) {
    spdlog::warn("pageviews: {} malformed lines skipped, {} titles kept undecoded", total.malformed_lines,
                 total.undecodable_titles);
  }
  if (stats != nullptr) *stats += total;
  return to_vector(std::move(merged));
}

}  // namespace wikimpact
