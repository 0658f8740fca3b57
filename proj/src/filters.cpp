#include "wikimpact/filters.hpp"

#include <charconv>
#include <optional>

#include <boost/regex.hpp>
#include <spdlog/spdlog.h>

#include "wikimpact/error.hpp"
#include "wikimpact/xml_query.hpp"

namespace wikimpact {

struct PreFilter::Impl {
  std::optional<boost::regex> regex;
  std::optional<xml::Query> query;
};

PreFilter::PreFilter(PreFilterKind kind, std::string expression)
    : kind_(kind), expression_(std::move(expression)) {
  auto impl = std::make_shared<Impl>();
  switch (kind_) {
    case PreFilterKind::Regex:
      try {
        impl->regex.emplace(expression_, boost::regex::perl);
      } catch (const boost::regex_error& e) {
        throw InvalidExpression("bad regular expression '" + expression_ + "': " + e.what());
      }
      break;
    case PreFilterKind::PathQuery:
      impl->query.emplace(expression_, xml::Query::Dialect::XPath);
      break;
    case PreFilterKind::StructQuery:
      impl->query.emplace(expression_, xml::Query::Dialect::XQuery);
      break;
  }
  impl_ = std::move(impl);
}

bool PreFilter::accepts(std::string_view page_xml) const {
  if (impl_->regex) {
    try {
      return boost::regex_match(page_xml.begin(), page_xml.end(), *impl_->regex);
    } catch (const std::runtime_error& e) {
      throw FilterEvaluationError(std::string("regex evaluation failed: ") + e.what());
    }
  }
  try {
    return impl_->query->selects(xml::Document::parse(page_xml));
  } catch (const MalformedPageXml& e) {
    throw FilterEvaluationError(std::string("page is not well-formed XML: ") + e.what());
  }
}

PreFilter PreFilter::main_namespace() { return {PreFilterKind::Regex, "(?is).*<ns>0</ns>.*"}; }

PreFilter parse_prefilter(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("prefilter '" + std::string(spec) + "' lacks a kind prefix (regex:, xpath:, xquery:)");
  }
  const auto kind = spec.substr(0, colon);
  std::string expr(spec.substr(colon + 1));
  if (kind == "regex") return {PreFilterKind::Regex, std::move(expr)};
  if (kind == "xpath") return {PreFilterKind::PathQuery, std::move(expr)};
  if (kind == "xquery") return {PreFilterKind::StructQuery, std::move(expr)};
  throw ConfigError("unknown prefilter kind '" + std::string(kind) + "'");
}

bool apply_prefilters(const RawPageRecord& record, std::span<const PreFilter> filters,
                      std::size_t* evaluation_errors) {
  for (const auto& f : filters) {
    try {
      if (!f.accepts(record.xml)) return false;
    } catch (const FilterEvaluationError& e) {
      spdlog::warn("prefilter '{}' rejected a page it could not evaluate: {}", f.expression(), e.what());
      if (evaluation_errors != nullptr) ++*evaluation_errors;
      return false;
    }
  }
  return true;
}

PostFilter PostFilter::namespace_equals(std::int64_t ns) {
  return {"ns=" + std::to_string(ns), [ns](const Page& p) { return p.ns == ns; }};
}

PostFilter PostFilter::min_revisions(std::size_t n) {
  return {"min-revisions=" + std::to_string(n), [n](const Page& p) { return p.revisions.size() >= n; }};
}

PostFilter PostFilter::max_revisions(std::size_t n) {
  return {"max-revisions=" + std::to_string(n), [n](const Page& p) { return p.revisions.size() <= n; }};
}

PostFilter parse_postfilter(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos) throw ConfigError("postfilter '" + std::string(spec) + "' must be NAME=VALUE");
  const auto name = spec.substr(0, eq);
  const auto value = spec.substr(eq + 1);
  std::int64_t n = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError("postfilter '" + std::string(spec) + "' needs an integer value");
  }
  if (name == "ns") return PostFilter::namespace_equals(n);
  if (n < 0) throw ConfigError("postfilter '" + std::string(spec) + "' needs a non-negative value");
  if (name == "min-revisions") return PostFilter::min_revisions(static_cast<std::size_t>(n));
  if (name == "max-revisions") return PostFilter::max_revisions(static_cast<std::size_t>(n));
  throw ConfigError("unknown postfilter '" + std::string(name) + "'");
}

bool passes_postfilters(const Page& page, std::span<const PostFilter> filters) {
  for (const auto& f : filters) {
    if (!f.predicate(page)) return false;
  }
  return true;
}

std::vector<Page> apply_postfilters(std::vector<Page> pages, std::span<const PostFilter> filters) {
  std::vector<Page> out;
  out.reserve(pages.size());
  for (auto& p : pages) {
    if (passes_postfilters(p, filters)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace wikimpact
