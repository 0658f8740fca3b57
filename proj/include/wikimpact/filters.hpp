#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wikimpact/model.hpp"
#include "wikimpact/page_splitter.hpp"

namespace wikimpact {

enum class PreFilterKind {
  /// Perl-syntax regular expression that must match the whole record.
  Regex,
  /// XPath expression; the record passes iff the selection is non-empty.
  PathQuery,
  /// XQuery FLWOR expression; same acceptance rule as PathQuery.
  StructQuery,
};

/// Predicate over raw page XML, evaluated before parsing. Compiled on
/// construction and immutable afterwards, so one instance may be shared by
/// concurrent workers.
class PreFilter {
 public:
  /// Throws InvalidExpression if `expression` does not compile.
  PreFilter(PreFilterKind kind, std::string expression);

  /// Throws FilterEvaluationError when the record cannot be evaluated
  /// (ill-formed XML for the query kinds, regex complexity limits).
  bool accepts(std::string_view page_xml) const;

  PreFilterKind kind() const noexcept { return kind_; }
  const std::string& expression() const noexcept { return expression_; }

  /// Accepts pages of the main namespace: "(?is).*<ns>0</ns>.*".
  static PreFilter main_namespace();

  struct Impl;

 private:
  PreFilterKind kind_;
  std::string expression_;
  std::shared_ptr<const Impl> impl_;
};

/// Parses "regex:EXPR", "xpath:EXPR" or "xquery:EXPR".
/// Throws ConfigError for an unknown kind and InvalidExpression for bad EXPR.
PreFilter parse_prefilter(std::string_view spec);

/// True iff every filter accepts the record, stopping at the first
/// rejection. A filter that fails to evaluate rejects the record; such
/// failures are logged and added to `evaluation_errors` when given.
bool apply_prefilters(const RawPageRecord& record, std::span<const PreFilter> filters,
                      std::size_t* evaluation_errors = nullptr);

struct PostFilter {
  std::string name;
  std::function<bool(const Page&)> predicate;

  static PostFilter namespace_equals(std::int64_t ns);
  static PostFilter min_revisions(std::size_t n);
  static PostFilter max_revisions(std::size_t n);
};

/// Parses "ns=N", "min-revisions=N" or "max-revisions=N". Throws ConfigError.
PostFilter parse_postfilter(std::string_view spec);

/// True iff every predicate holds, stopping at the first failure.
bool passes_postfilters(const Page& page, std::span<const PostFilter> filters);

/// Pages for which every predicate holds, in input order.
std::vector<Page> apply_postfilters(std::vector<Page> pages, std::span<const PostFilter> filters);

}  // namespace wikimpact
