#pragma once

// Small in-memory XML tree plus an evaluator for an XPath 1.0 subset and
// an XQuery FLWOR subset, sufficient to select nodes of a single page
// fragment.
//
// Supported XPath: absolute and relative location paths, '//' and the axes
// child, descendant, descendant-or-self, self, parent, ancestor,
// ancestor-or-self, attribute, following-sibling, preceding-sibling; name,
// '*', text() and node() tests; predicates; union '|'; arithmetic,
// comparison and boolean operators; string literals, numbers, variables and
// the core function library (count, contains, starts-with, not, string,
// number, position, last, ...).
//
// Supported XQuery: any of the above, plus
//   for $v in E (, $w in E)* (let $x := E)* (where E)? return E
// with value comparisons eq/ne/lt/le/gt/ge as aliases of the general ones.

#include <cstddef>
#include <deque>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wikimpact::xml {

struct Node {
  enum class Kind { Document, Element, Text, Attribute };

  Kind kind = Kind::Element;
  std::string name;
  /// Character data for Text nodes and the value for Attribute nodes.
  std::string value;
  const Node* parent = nullptr;
  std::vector<const Node*> children;
  std::vector<const Node*> attributes;
  /// Position in document order; attributes sort right after their owner.
  std::size_t order = 0;

  /// XPath string-value: concatenated descendant text for elements and the
  /// document, `value` otherwise.
  std::string string_value() const;
};

class Document {
 public:
  /// Builds the tree. Throws MalformedPageXml on ill-formed input.
  static Document parse(std::string_view xml);

  const Node& root() const { return nodes_.front(); }

 private:
  Document() = default;
  friend struct TreeBuilder;
  std::deque<Node> nodes_;
};

using NodeSet = std::vector<const Node*>;

/// Result of an XQuery expression that produced atomic values; holds their
/// string forms.
struct AtomicSequence {
  std::vector<std::string> items;
};

using Value = std::variant<NodeSet, std::string, double, bool, AtomicSequence>;

/// XPath boolean() conversion; a sequence is true iff non-empty.
bool effective_boolean(const Value& v);

class Query {
 public:
  enum class Dialect { XPath, XQuery };

  /// Throws InvalidExpression when `text` does not parse in `dialect`.
  Query(std::string_view text, Dialect dialect);
  ~Query();
  Query(Query&&) noexcept;
  Query& operator=(Query&&) noexcept;

  Value evaluate(const Document& doc) const;

  /// True iff the result is a non-empty selection (or a true/non-empty
  /// atomic value).
  bool selects(const Document& doc) const { return effective_boolean(evaluate(doc)); }

  struct Expr;

 private:
  std::unique_ptr<Expr> root_;
};

}  // namespace wikimpact::xml
