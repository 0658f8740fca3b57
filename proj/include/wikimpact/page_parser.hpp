#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wikimpact/filters.hpp"
#include "wikimpact/model.hpp"
#include "wikimpact/page_splitter.hpp"

namespace wikimpact {

enum class ParserVariant {
  /// Streaming XML parser (expat) over the page fragment.
  EventXml,
  /// Line-oriented matcher driven by a RegexTable. Expects the one-element-
  /// per-line layout of MediaWiki exports.
  RegexLines,
};

/// Whole-line patterns (Perl syntax) used by the RegexLines variant. Capture
/// groups are noted per field; captured values are XML-unescaped.
struct RegexTable {
  std::string title = R"(\s*<title>(.*)</title>\s*)";             // 1: title
  std::string ns = R"(\s*<ns>(-?[0-9]+)</ns>\s*)";                 // 1: namespace
  std::string id = R"(\s*<id>([0-9]+)</id>\s*)";                   // 1: page, revision or user id
  std::string redirect = R"(\s*<redirect\b.*)";
  std::string revision_open = R"(\s*<revision>\s*)";
  std::string revision_close = R"(\s*</revision>\s*)";
  std::string parent_id = R"(\s*<parentid>([0-9]+)</parentid>\s*)";  // 1: parent id
  std::string timestamp = R"(\s*<timestamp>(.*)</timestamp>\s*)";    // 1: timestamp
  std::string contributor_open = R"(\s*<contributor(\s[^>]*?)?(/?)>\s*)";  // 1: attributes, 2: '/'
  std::string contributor_close = R"(\s*</contributor>\s*)";
  std::string username = R"(\s*<username>(.*)</username>\s*)";  // 1: username
  std::string ip = R"(\s*<ip>(.*)</ip>\s*)";                     // 1: address
  // The opening tag may carry extra attributes (bytes=, sha1=, ...).
  std::string text_open = R"(\s*<text(\s[^>]*?)?(/?)>(.*))";  // 1: attributes, 2: '/', 3: rest
  std::string text_close = R"((.*?)</text>\s*)";             // 1: final text line
};

struct ParserConfig {
  ParserVariant variant = ParserVariant::EventXml;
  /// Applied by the pipeline, in order, before a record reaches the parser.
  std::vector<PreFilter> prefilters;
  /// Drop a revision when the next one is by the same author.
  bool collapse_consecutive = true;
  /// Patterns for RegexLines; null selects the default table.
  std::shared_ptr<const RegexTable> regex_table;
};

/// RegexLines is chosen for compressed inputs above this size.
inline constexpr std::uintmax_t kRegexParserThresholdBytes = 500ULL * 1000 * 1000;

ParserVariant default_variant_for(const std::filesystem::path& dump);

/// Converts raw page records into Page objects. Construction compiles the
/// configured patterns; parse() is const and safe to call concurrently.
class PageParser {
 public:
  explicit PageParser(ParserConfig config);
  ~PageParser();
  PageParser(PageParser&&) noexcept;
  PageParser& operator=(PageParser&&) noexcept;

  /// The parsed page, or nullopt for pages excluded by the redirect rule (a
  /// redirect marker before the first revision and a ':' in the title).
  /// Throws MalformedPageXml for records that cannot be interpreted.
  std::optional<Page> parse(const RawPageRecord& record) const;

  const ParserConfig& config() const noexcept { return config_; }

  struct Compiled;

 private:
  ParserConfig config_;
  std::unique_ptr<const Compiled> compiled_;
};

/// One-shot convenience over PageParser.
std::optional<Page> parse_page(const RawPageRecord& record, const ParserConfig& config);

/// Removes every revision whose successor is by the same author (per
/// identity_matches), repeating until no adjacent pair matches, then
/// renumbers within_page_id as 1..n.
void collapse_consecutive_revisions(std::vector<Revision>& revisions);

/// Revision ids produced by each variant over a whole dump, sorted.
struct EquivalenceIds {
  std::vector<std::uint64_t> event_xml;
  std::vector<std::uint64_t> regex_lines;
  /// Pages skipped as malformed by each variant.
  std::size_t event_xml_malformed = 0;
  std::size_t regex_lines_malformed = 0;
};

/// Parses `dump` with both variants using the same prefilters and regex
/// table. Propagates I/O and decompression errors.
EquivalenceIds parse_equivalence_ids(const std::filesystem::path& dump,
                                     const std::vector<PreFilter>& prefilters = {},
                                     std::shared_ptr<const RegexTable> regex_table = nullptr,
                                     std::size_t parallelism = 1);

}  // namespace wikimpact
