#include "wikimpact/page_parser.hpp"

#include <algorithm>
#include <charconv>
#include <string_view>

#include <boost/regex.hpp>
#include <expat.h>
#include <spdlog/spdlog.h>

#include "wikimpact/decompress.hpp"
#include "wikimpact/error.hpp"
#include "wikimpact/parallel.hpp"
#include "wikimpact/xml_text.hpp"

namespace wikimpact {
namespace {

template <typename Int>
Int parse_int(std::string_view s, const char* what) {
  Int v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw MalformedPageXml(std::string("bad ") + what + " '" + std::string(s.substr(0, 64)) + "'");
  }
  return v;
}

struct RevisionDraft {
  std::optional<std::uint64_t> id;
  std::optional<std::uint64_t> parent_id;
  std::optional<std::string> timestamp;
  std::string text;
  bool contributor_deleted = false;
  std::optional<std::uint64_t> user_id;
  std::optional<std::string> username;
  std::optional<std::string> ip;

  Revision finish() {
    if (!id) throw MalformedPageXml("revision without <id>");
    Revision r;
    r.id = *id;
    r.parent_id = parent_id;
    r.timestamp = std::move(timestamp);
    r.text = std::move(text);
    if (contributor_deleted) {
      r.contributor = Contributor::deleted();
    } else if (username) {
      r.contributor = Contributor::registered(user_id, std::move(*username));
    } else if (ip) {
      r.contributor = Contributor::anonymous(std::move(*ip));
    } else {
      r.contributor = Contributor::deleted();
    }
    return r;
  }
};

struct PageDraft {
  std::optional<std::uint64_t> id;
  std::string title;
  std::int64_t ns = 0;
  bool redirect = false;
  std::vector<Revision> revisions;

  std::optional<Page> finish(bool collapse) {
    if (!id) throw MalformedPageXml("page without <id> (title '" + title + "')");
    if (redirect && title.find(':') != std::string::npos) return std::nullopt;
    Page page;
    page.id = *id;
    page.title = std::move(title);
    page.ns = ns;
    page.revisions = std::move(revisions);
    if (collapse) {
      collapse_consecutive_revisions(page.revisions);
    } else {
      for (std::size_t i = 0; i < page.revisions.size(); ++i) {
        page.revisions[i].within_page_id = static_cast<std::uint32_t>(i + 1);
      }
    }
    return page;
  }
};

// ---------------------------------------------------------------------------
// EventXml

class EventParser {
 public:
  explicit EventParser(bool collapse) : collapse_(collapse) {}

  std::optional<Page> run(std::string_view xml) {
    parser_ = XML_ParserCreate("UTF-8");
    if (parser_ == nullptr) throw std::bad_alloc();
    XML_SetUserData(parser_, this);
    XML_SetElementHandler(parser_, &EventParser::on_start, &EventParser::on_end);
    XML_SetCharacterDataHandler(parser_, &EventParser::on_chars);

    constexpr std::size_t kPiece = std::size_t{1} << 30;
    bool ok = true;
    do {
      const auto n = std::min(xml.size(), kPiece);
      ok = XML_Parse(parser_, xml.data(), static_cast<int>(n), n == xml.size()) == XML_STATUS_OK;
      xml.remove_prefix(n);
    } while (ok && !xml.empty());

    std::string failure = error_;
    if (!ok && failure.empty()) {
      failure = std::string(XML_ErrorString(XML_GetErrorCode(parser_))) + " at line " +
                std::to_string(XML_GetCurrentLineNumber(parser_));
    }
    XML_ParserFree(parser_);
    if (!failure.empty()) throw MalformedPageXml(failure);
    return page_.finish(collapse_);
  }

 private:
  // Elements whose character data is needed.
  static bool collects(std::string_view name) {
    return name == "text" || name == "id" || name == "title" || name == "ns" || name == "parentid" ||
           name == "timestamp" || name == "username" || name == "ip";
  }

  std::string_view parent() const {
    return stack_.size() >= 2 ? std::string_view(stack_[stack_.size() - 2]) : std::string_view();
  }

  static bool has_deleted_attribute(const XML_Char** atts) {
    for (std::size_t i = 0; atts[i] != nullptr; i += 2) {
      if (std::string_view(atts[i]) == "deleted") return true;
    }
    return false;
  }

  void fail(std::string why) {
    if (error_.empty()) error_ = std::move(why);
    XML_StopParser(parser_, XML_FALSE);
  }

  static void XMLCALL on_start(void* user, const XML_Char* name_c, const XML_Char** atts) {
    auto& p = *static_cast<EventParser*>(user);
    p.stack_.emplace_back(name_c);
    p.chars_.clear();
    p.collecting_ = collects(p.stack_.back());
    const std::string_view name = p.stack_.back();
    const std::string_view parent = p.parent();

    if (name == "revision" && parent == "page") {
      p.rev_.emplace();
      p.seen_revision_ = true;
    } else if (name == "redirect" && parent == "page" && !p.seen_revision_) {
      p.page_.redirect = true;
    } else if (name == "contributor" && p.rev_) {
      p.rev_->contributor_deleted = has_deleted_attribute(atts);
    }
  }

  static void XMLCALL on_end(void* user, const XML_Char*) {
    auto& p = *static_cast<EventParser*>(user);
    try {
      p.close_element();
    } catch (const MalformedPageXml& e) {
      p.fail(e.what());
    }
    p.stack_.pop_back();
    p.collecting_ = false;
  }

  static void XMLCALL on_chars(void* user, const XML_Char* s, int len) {
    auto& p = *static_cast<EventParser*>(user);
    // Character data may arrive in several pieces; they are concatenated
    // until the element closes.
    if (p.collecting_) p.chars_.append(s, static_cast<std::size_t>(len));
  }

  void close_element() {
    const std::string_view name = stack_.back();
    const std::string_view parent = this->parent();
    if (parent == "page") {
      if (name == "title") {
        page_.title = std::move(chars_);
      } else if (name == "ns") {
        page_.ns = parse_int<std::int64_t>(chars_, "namespace");
      } else if (name == "id") {
        if (!page_.id) page_.id = parse_int<std::uint64_t>(chars_, "page id");
      } else if (name == "revision" && rev_) {
        page_.revisions.push_back(rev_->finish());
        rev_.reset();
      }
    } else if (parent == "revision" && rev_) {
      if (name == "id") {
        if (!rev_->id) rev_->id = parse_int<std::uint64_t>(chars_, "revision id");
      } else if (name == "parentid") {
        rev_->parent_id = parse_int<std::uint64_t>(chars_, "parent id");
      } else if (name == "timestamp") {
        rev_->timestamp = std::move(chars_);
      } else if (name == "text") {
        rev_->text = std::move(chars_);
      }
    } else if (parent == "contributor" && rev_) {
      if (name == "username") {
        rev_->username = std::move(chars_);
      } else if (name == "id") {
        rev_->user_id = parse_int<std::uint64_t>(chars_, "user id");
      } else if (name == "ip") {
        rev_->ip = std::move(chars_);
      }
    }
    chars_.clear();
  }

  bool collapse_;
  XML_Parser parser_ = nullptr;
  std::vector<std::string> stack_;
  std::string chars_;
  bool collecting_ = false;
  bool seen_revision_ = false;
  PageDraft page_;
  std::optional<RevisionDraft> rev_;
  std::string error_;
};

}  // namespace

// ---------------------------------------------------------------------------
// RegexLines

struct PageParser::Compiled {
  boost::regex title, ns, id, redirect, revision_open, revision_close, parent_id, timestamp,
      contributor_open, contributor_close, username, ip, text_open, text_close;

  explicit Compiled(const RegexTable& t)
      : title(compile(t.title)),
        ns(compile(t.ns)),
        id(compile(t.id)),
        redirect(compile(t.redirect)),
        revision_open(compile(t.revision_open)),
        revision_close(compile(t.revision_close)),
        parent_id(compile(t.parent_id)),
        timestamp(compile(t.timestamp)),
        contributor_open(compile(t.contributor_open)),
        contributor_close(compile(t.contributor_close)),
        username(compile(t.username)),
        ip(compile(t.ip)),
        text_open(compile(t.text_open)),
        text_close(compile(t.text_close)) {}

  static boost::regex compile(const std::string& pattern) {
    try {
      return boost::regex(pattern, boost::regex::perl);
    } catch (const boost::regex_error& e) {
      throw InvalidExpression("bad line pattern '" + pattern + "': " + e.what());
    }
  }

  std::optional<Page> parse(std::string_view raw, bool collapse) const;
};

namespace {

using SvIter = std::string_view::const_iterator;
using SvMatch = boost::match_results<SvIter>;

bool full_match(std::string_view line, SvMatch& m, const boost::regex& re) {
  return boost::regex_match(line.begin(), line.end(), m, re);
}

std::string group(const SvMatch& m, int i) { return m[i].matched ? m[i].str() : std::string(); }

}  // namespace

std::optional<Page> PageParser::Compiled::parse(std::string_view raw, bool collapse) const {
  const std::string xml = normalize_newlines(raw);
  const std::string_view all(xml);

  PageDraft page;
  std::optional<RevisionDraft> rev;
  bool in_contributor = false;
  bool in_text = false;
  bool seen_revision = false;
  std::string text;
  SvMatch m;

  std::size_t pos = 0;
  while (pos <= all.size()) {
    auto nl = all.find('\n', pos);
    if (nl == std::string_view::npos) nl = all.size();
    const std::string_view line = all.substr(pos, nl - pos);
    pos = nl + 1;

    if (in_text) {
      if (line.find("</text>") != std::string_view::npos && full_match(line, m, text_close)) {
        text += '\n';
        text += group(m, 1);
        in_text = false;
        if (rev) rev->text = xml_unescape(text);
      } else {
        text += '\n';
        text.append(line);
      }
      continue;
    }

    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] != '<') continue;

    if (full_match(line, m, revision_open)) {
      rev.emplace();
      seen_revision = true;
    } else if (full_match(line, m, revision_close)) {
      if (!rev) throw MalformedPageXml("unbalanced </revision>");
      page.revisions.push_back(rev->finish());
      rev.reset();
      in_contributor = false;
    } else if (rev && full_match(line, m, contributor_open)) {
      const auto attrs = group(m, 1);
      rev->contributor_deleted = attrs.find("deleted=") != std::string::npos;
      in_contributor = group(m, 2) != "/";
    } else if (rev && full_match(line, m, contributor_close)) {
      in_contributor = false;
    } else if (rev && full_match(line, m, text_open)) {
      if (group(m, 2) == "/") {
        rev->text.clear();
        continue;
      }
      const std::string_view rest(m[3].first, static_cast<std::size_t>(m[3].length()));
      if (rest.find("</text>") != std::string_view::npos && full_match(rest, m, text_close)) {
        rev->text = xml_unescape(group(m, 1));
      } else {
        in_text = true;
        text.assign(rest);
      }
    } else if (full_match(line, m, id)) {
      const auto value = group(m, 1);
      if (in_contributor && rev) {
        rev->user_id = parse_int<std::uint64_t>(value, "user id");
      } else if (rev) {
        if (!rev->id) rev->id = parse_int<std::uint64_t>(value, "revision id");
      } else if (!page.id) {
        page.id = parse_int<std::uint64_t>(value, "page id");
      }
    } else if (rev && full_match(line, m, parent_id)) {
      rev->parent_id = parse_int<std::uint64_t>(group(m, 1), "parent id");
    } else if (rev && full_match(line, m, timestamp)) {
      rev->timestamp = xml_unescape(group(m, 1));
    } else if (in_contributor && full_match(line, m, username)) {
      rev->username = xml_unescape(group(m, 1));
    } else if (in_contributor && full_match(line, m, ip)) {
      rev->ip = xml_unescape(group(m, 1));
    } else if (!rev && full_match(line, m, title)) {
      page.title = xml_unescape(group(m, 1));
    } else if (!rev && full_match(line, m, ns)) {
      page.ns = parse_int<std::int64_t>(group(m, 1), "namespace");
    } else if (!seen_revision && full_match(line, m, redirect)) {
      page.redirect = true;
    }
  }
  if (in_text) throw MalformedPageXml("unterminated <text> in page '" + page.title + "'");
  if (rev) throw MalformedPageXml("unterminated <revision> in page '" + page.title + "'");
  return page.finish(collapse);
}

// ---------------------------------------------------------------------------

ParserVariant default_variant_for(const std::filesystem::path& dump) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(dump, ec);
  if (!ec && codec_for_path(dump) != Codec::None && size > kRegexParserThresholdBytes) {
    return ParserVariant::RegexLines;
  }
  return ParserVariant::EventXml;
}

PageParser::PageParser(ParserConfig config) : config_(std::move(config)) {
  if (config_.variant == ParserVariant::RegexLines) {
    static const RegexTable kDefaults;
    compiled_ = std::make_unique<const Compiled>(config_.regex_table ? *config_.regex_table : kDefaults);
  }
}

PageParser::~PageParser() = default;
PageParser::PageParser(PageParser&&) noexcept = default;
PageParser& PageParser::operator=(PageParser&&) noexcept = default;

std::optional<Page> PageParser::parse(const RawPageRecord& record) const {
  if (compiled_) return compiled_->parse(record.xml, config_.collapse_consecutive);
  return EventParser(config_.collapse_consecutive).run(record.xml);
}

std::optional<Page> parse_page(const RawPageRecord& record, const ParserConfig& config) {
  return PageParser(config).parse(record);
}

void collapse_consecutive_revisions(std::vector<Revision>& revisions) {
  std::vector<Revision> kept;
  kept.reserve(revisions.size());
  for (auto& r : revisions) {
    // The relation is not transitive (ids win over usernames), so keep
    // popping until the new tail no longer matches.
    while (!kept.empty() && identity_matches(kept.back().contributor, r.contributor)) kept.pop_back();
    kept.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i].within_page_id = static_cast<std::uint32_t>(i + 1);
  revisions = std::move(kept);
}

EquivalenceIds parse_equivalence_ids(const std::filesystem::path& dump,
                                     const std::vector<PreFilter>& prefilters,
                                     std::shared_ptr<const RegexTable> regex_table,
                                     std::size_t parallelism) {
  ParserConfig event_cfg;
  event_cfg.variant = ParserVariant::EventXml;
  ParserConfig regex_cfg;
  regex_cfg.variant = ParserVariant::RegexLines;
  regex_cfg.regex_table = std::move(regex_table);
  const PageParser event_parser(event_cfg);
  const PageParser regex_parser(regex_cfg);

  EquivalenceIds out;
  auto run_batch = [&](std::vector<RawPageRecord>& batch) {
    struct Result {
      std::vector<std::uint64_t> event, regex;
      bool event_bad = false, regex_bad = false;
    };
    std::vector<Result> results(batch.size());
    parallel_for(parallelism, batch.size(), [&](std::size_t i) {
      if (!apply_prefilters(batch[i], prefilters)) return;
      auto& res = results[i];
      try {
        if (auto p = event_parser.parse(batch[i])) {
          for (const auto& r : p->revisions) res.event.push_back(r.id);
        }
      } catch (const MalformedPageXml&) {
        res.event_bad = true;
      }
      try {
        if (auto p = regex_parser.parse(batch[i])) {
          for (const auto& r : p->revisions) res.regex.push_back(r.id);
        }
      } catch (const MalformedPageXml&) {
        res.regex_bad = true;
      }
    });
    for (auto& res : results) {
      out.event_xml.insert(out.event_xml.end(), res.event.begin(), res.event.end());
      out.regex_lines.insert(out.regex_lines.end(), res.regex.begin(), res.regex.end());
      out.event_xml_malformed += res.event_bad;
      out.regex_lines_malformed += res.regex_bad;
    }
    batch.clear();
  };

  auto source = open_decompressed(dump, parallelism);
  PageSplitter splitter;
  RecordDeduplicator dedup;
  std::vector<RawPageRecord> batch;
  constexpr std::size_t kBatch = 512;
  while (auto chunk = source->next()) {
    splitter.feed(*chunk);
    while (auto rec = splitter.next()) {
      if (!dedup.first_occurrence(rec->xml)) continue;
      batch.push_back(std::move(*rec));
      if (batch.size() >= kBatch) run_batch(batch);
    }
  }
  splitter.finish();
  run_batch(batch);

  std::sort(out.event_xml.begin(), out.event_xml.end());
  std::sort(out.regex_lines.begin(), out.regex_lines.end());
  if (out.event_xml_malformed + out.regex_lines_malformed > 0) {
    spdlog::warn("skipped malformed pages: {} (event parser), {} (line parser)", out.event_xml_malformed,
                 out.regex_lines_malformed);
  }
  return out;
}

}  // namespace wikimpact
