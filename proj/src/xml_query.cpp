#include "wikimpact/xml_query.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <expat.h>

#include "wikimpact/error.hpp"

namespace wikimpact::xml {

std::string Node::string_value() const {
  if (kind == Kind::Text || kind == Kind::Attribute) return value;
  std::string out;
  std::vector<const Node*> stack(children.rbegin(), children.rend());
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (n->kind == Kind::Text) {
      out += n->value;
    } else {
      stack.insert(stack.end(), n->children.rbegin(), n->children.rend());
    }
  }
  return out;
}

struct TreeBuilder {
  Document doc;
  std::vector<Node*> open;
  Node* pending_text = nullptr;
  std::size_t order = 0;

  Node& make(Node::Kind kind, Node* parent) {
    Node& n = doc.nodes_.emplace_back();
    n.kind = kind;
    n.parent = parent;
    n.order = order++;
    return n;
  }

  static void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** atts) {
    auto& b = *static_cast<TreeBuilder*>(user);
    b.pending_text = nullptr;
    Node* parent = b.open.back();
    Node& el = b.make(Node::Kind::Element, parent);
    el.name = name;
    parent->children.push_back(&el);
    for (std::size_t i = 0; atts[i] != nullptr; i += 2) {
      Node& attr = b.make(Node::Kind::Attribute, &el);
      attr.name = atts[i];
      attr.value = atts[i + 1];
      el.attributes.push_back(&attr);
    }
    b.open.push_back(&el);
  }

  static void XMLCALL on_end(void* user, const XML_Char*) {
    auto& b = *static_cast<TreeBuilder*>(user);
    b.pending_text = nullptr;
    b.open.pop_back();
  }

  static void XMLCALL on_text(void* user, const XML_Char* s, int len) {
    auto& b = *static_cast<TreeBuilder*>(user);
    if (b.pending_text == nullptr) {
      Node* parent = b.open.back();
      b.pending_text = &b.make(Node::Kind::Text, parent);
      parent->children.push_back(b.pending_text);
    }
    b.pending_text->value.append(s, static_cast<std::size_t>(len));
  }
};

Document Document::parse(std::string_view xml) {
  TreeBuilder b;
  Node& root = b.make(Node::Kind::Document, nullptr);
  b.open.push_back(&root);

  XML_Parser parser = XML_ParserCreate("UTF-8");
  if (parser == nullptr) throw std::bad_alloc();
  XML_SetUserData(parser, &b);
  XML_SetElementHandler(parser, &TreeBuilder::on_start, &TreeBuilder::on_end);
  XML_SetCharacterDataHandler(parser, &TreeBuilder::on_text);

  constexpr std::size_t kPiece = std::size_t{1} << 30;
  bool ok = true;
  do {
    const auto n = std::min(xml.size(), kPiece);
    const bool last = n == xml.size();
    ok = XML_Parse(parser, xml.data(), static_cast<int>(n), last ? 1 : 0) == XML_STATUS_OK;
    xml.remove_prefix(n);
  } while (ok && !xml.empty());

  if (!ok) {
    const std::string msg = std::string(XML_ErrorString(XML_GetErrorCode(parser))) + " at line " +
                            std::to_string(XML_GetCurrentLineNumber(parser));
    XML_ParserFree(parser);
    throw MalformedPageXml(msg);
  }
  XML_ParserFree(parser);
  return std::move(b.doc);
}

// ---------------------------------------------------------------------------
// Value conversions

namespace {

double parse_number(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  // XPath numbers: optional '-', digits, optional fraction; no exponent.
  std::size_t i = s[0] == '-' ? 1 : 0;
  bool digits = false;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, digits = true;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, digits = true;
  }
  if (!digits || i != s.size()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::string format_number(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
  if (d == 0) return "0";
  if (d == std::trunc(d) && std::fabs(d) < 1e15) return std::to_string(static_cast<long long>(d));
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, end);
}

std::vector<std::string> strings_of(const Value& v) {
  std::vector<std::string> out;
  if (const auto* ns = std::get_if<NodeSet>(&v)) {
    out.reserve(ns->size());
    for (const Node* n : *ns) out.push_back(n->string_value());
  } else if (const auto* seq = std::get_if<AtomicSequence>(&v)) {
    out = seq->items;
  }
  return out;
}

bool is_sequence(const Value& v) {
  return std::holds_alternative<NodeSet>(v) || std::holds_alternative<AtomicSequence>(v);
}

std::string to_string(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, NodeSet>) {
          return x.empty() ? std::string() : x.front()->string_value();
        } else if constexpr (std::is_same_v<T, AtomicSequence>) {
          return x.items.empty() ? std::string() : x.items.front();
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(x);
        } else {
          return x ? "true" : "false";
        }
      },
      v);
}

double to_number(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
  return parse_number(to_string(v));
}

}  // namespace

bool effective_boolean(const Value& v) {
  return std::visit(
      [](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, NodeSet>) {
          return !x.empty();
        } else if constexpr (std::is_same_v<T, AtomicSequence>) {
          return !x.items.empty();
        } else if constexpr (std::is_same_v<T, std::string>) {
          return !x.empty();
        } else if constexpr (std::is_same_v<T, double>) {
          return x != 0 && !std::isnan(x);
        } else {
          return x;
        }
      },
      v);
}

// ---------------------------------------------------------------------------
// Expression tree

namespace {

struct Binding {
  std::string name;
  Value value;
  const Binding* next = nullptr;
};

struct Ctx {
  const Node* node = nullptr;
  std::size_t position = 1;
  std::size_t size = 1;
  const Binding* vars = nullptr;
};

}  // namespace

struct Query::Expr {
  virtual ~Expr() = default;
  virtual Value eval(const Ctx& ctx) const = 0;
};

namespace {

using ExprPtr = std::unique_ptr<Query::Expr>;

void sort_document_order(NodeSet& ns) {
  std::sort(ns.begin(), ns.end(), [](const Node* a, const Node* b) { return a->order < b->order; });
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
}

NodeSet require_nodes(Value v, const char* what) {
  if (auto* ns = std::get_if<NodeSet>(&v)) return std::move(*ns);
  throw FilterEvaluationError(std::string(what) + " requires a node-set");
}

struct Literal final : Query::Expr {
  Value value;
  explicit Literal(Value v) : value(std::move(v)) {}
  Value eval(const Ctx&) const override { return value; }
};

struct VarRef final : Query::Expr {
  std::string name;
  explicit VarRef(std::string n) : name(std::move(n)) {}
  Value eval(const Ctx& ctx) const override {
    for (const Binding* b = ctx.vars; b != nullptr; b = b->next) {
      if (b->name == name) return b->value;
    }
    throw FilterEvaluationError("unbound variable $" + name);
  }
};

enum class BinOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod };

bool compare_atoms(BinOp op, const std::string& a, const std::string& b) {
  switch (op) {
    case BinOp::Eq:
      return a == b;
    case BinOp::Ne:
      return a != b;
    default:
      break;
  }
  const double x = parse_number(a);
  const double y = parse_number(b);
  switch (op) {
    case BinOp::Lt:
      return x < y;
    case BinOp::Le:
      return x <= y;
    case BinOp::Gt:
      return x > y;
    case BinOp::Ge:
      return x >= y;
    default:
      return false;
  }
}

bool compare_numbers(BinOp op, double x, double y) {
  switch (op) {
    case BinOp::Eq:
      return x == y;
    case BinOp::Ne:
      return x != y;
    case BinOp::Lt:
      return x < y;
    case BinOp::Le:
      return x <= y;
    case BinOp::Gt:
      return x > y;
    case BinOp::Ge:
      return x >= y;
    default:
      return false;
  }
}

BinOp mirror(BinOp op) {
  switch (op) {
    case BinOp::Lt:
      return BinOp::Gt;
    case BinOp::Le:
      return BinOp::Ge;
    case BinOp::Gt:
      return BinOp::Lt;
    case BinOp::Ge:
      return BinOp::Le;
    default:
      return op;
  }
}

// General comparison with XPath 1.0 existential semantics over sequences.
bool compare(BinOp op, const Value& a, const Value& b) {
  const bool seq_a = is_sequence(a);
  const bool seq_b = is_sequence(b);
  if (seq_a && seq_b) {
    const auto xs = strings_of(a);
    const auto ys = strings_of(b);
    for (const auto& x : xs) {
      for (const auto& y : ys) {
        if (compare_atoms(op, x, y)) return true;
      }
    }
    return false;
  }
  if (seq_b) return compare(mirror(op), b, a);
  if (seq_a) {
    if (const auto* flag = std::get_if<bool>(&b)) {
      return compare_numbers(op, effective_boolean(a) ? 1 : 0, *flag ? 1 : 0);
    }
    for (const auto& x : strings_of(a)) {
      if (const auto* num = std::get_if<double>(&b)) {
        if (compare_numbers(op, parse_number(x), *num)) return true;
      } else if (compare_atoms(op, x, std::get<std::string>(b))) {
        return true;
      }
    }
    return false;
  }
  if (op == BinOp::Eq || op == BinOp::Ne) {
    if (std::holds_alternative<bool>(a) || std::holds_alternative<bool>(b)) {
      return compare_numbers(op, effective_boolean(a), effective_boolean(b));
    }
    if (std::holds_alternative<double>(a) || std::holds_alternative<double>(b)) {
      return compare_numbers(op, to_number(a), to_number(b));
    }
    return compare_atoms(op, to_string(a), to_string(b));
  }
  return compare_numbers(op, to_number(a), to_number(b));
}

struct Binary final : Query::Expr {
  BinOp op;
  ExprPtr lhs;
  ExprPtr rhs;
  Binary(BinOp o, ExprPtr l, ExprPtr r) : op(o), lhs(std::move(l)), rhs(std::move(r)) {}

  Value eval(const Ctx& ctx) const override {
    switch (op) {
      case BinOp::Or:
        return effective_boolean(lhs->eval(ctx)) || effective_boolean(rhs->eval(ctx));
      case BinOp::And:
        return effective_boolean(lhs->eval(ctx)) && effective_boolean(rhs->eval(ctx));
      case BinOp::Eq:
      case BinOp::Ne:
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge:
        return compare(op, lhs->eval(ctx), rhs->eval(ctx));
      default:
        break;
    }
    const double x = to_number(lhs->eval(ctx));
    const double y = to_number(rhs->eval(ctx));
    switch (op) {
      case BinOp::Add:
        return x + y;
      case BinOp::Sub:
        return x - y;
      case BinOp::Mul:
        return x * y;
      case BinOp::Div:
        return x / y;
      default:
        return std::fmod(x, y);
    }
  }
};

struct Negate final : Query::Expr {
  ExprPtr operand;
  explicit Negate(ExprPtr e) : operand(std::move(e)) {}
  Value eval(const Ctx& ctx) const override { return -to_number(operand->eval(ctx)); }
};

struct Union final : Query::Expr {
  ExprPtr lhs;
  ExprPtr rhs;
  Union(ExprPtr l, ExprPtr r) : lhs(std::move(l)), rhs(std::move(r)) {}
  Value eval(const Ctx& ctx) const override {
    auto a = require_nodes(lhs->eval(ctx), "'|'");
    auto b = require_nodes(rhs->eval(ctx), "'|'");
    a.insert(a.end(), b.begin(), b.end());
    sort_document_order(a);
    return a;
  }
};

NodeSet apply_predicates(NodeSet nodes, const std::vector<ExprPtr>& predicates, const Ctx& outer) {
  for (const auto& pred : predicates) {
    NodeSet kept;
    const std::size_t size = nodes.size();
    for (std::size_t i = 0; i < size; ++i) {
      const Ctx ctx{nodes[i], i + 1, size, outer.vars};
      const Value v = pred->eval(ctx);
      const bool keep = std::holds_alternative<double>(v)
                            ? std::get<double>(v) == static_cast<double>(i + 1)
                            : effective_boolean(v);
      if (keep) kept.push_back(nodes[i]);
    }
    nodes = std::move(kept);
  }
  return nodes;
}

enum class Axis {
  Child,
  Descendant,
  DescendantOrSelf,
  Self,
  Parent,
  Ancestor,
  AncestorOrSelf,
  Attribute,
  FollowingSibling,
  PrecedingSibling,
};

enum class TestKind { Name, AnyName, Text, AnyNode };

struct Step {
  Axis axis = Axis::Child;
  TestKind test = TestKind::Name;
  std::string name;
  std::vector<ExprPtr> predicates;

  bool matches(const Node* n) const {
    switch (test) {
      case TestKind::AnyNode:
        return true;
      case TestKind::Text:
        return n->kind == Node::Kind::Text;
      case TestKind::AnyName:
        return axis == Axis::Attribute ? n->kind == Node::Kind::Attribute
                                       : n->kind == Node::Kind::Element;
      case TestKind::Name:
        break;
    }
    const auto principal = axis == Axis::Attribute ? Node::Kind::Attribute : Node::Kind::Element;
    return n->kind == principal && n->name == name;
  }

  // Candidates in axis order (reverse document order for reverse axes).
  NodeSet candidates(const Node* n) const {
    NodeSet out;
    auto add = [&](const Node* c) {
      if (matches(c)) out.push_back(c);
    };
    auto descend = [&](const Node* from) {
      std::vector<const Node*> stack(from->children.rbegin(), from->children.rend());
      while (!stack.empty()) {
        const Node* c = stack.back();
        stack.pop_back();
        add(c);
        stack.insert(stack.end(), c->children.rbegin(), c->children.rend());
      }
    };
    auto siblings = [&](bool following) {
      if (n->parent == nullptr || n->kind == Node::Kind::Attribute) return;
      const auto& sib = n->parent->children;
      const auto self = std::find(sib.begin(), sib.end(), n);
      if (following) {
        for (auto it = self + 1; it < sib.end(); ++it) add(*it);
      } else {
        for (auto it = std::make_reverse_iterator(self); it != sib.rend(); ++it) add(*it);
      }
    };

    switch (axis) {
      case Axis::Child:
        for (const Node* c : n->children) add(c);
        break;
      case Axis::DescendantOrSelf:
        add(n);
        [[fallthrough]];
      case Axis::Descendant:
        descend(n);
        break;
      case Axis::Self:
        add(n);
        break;
      case Axis::Parent:
        if (n->parent != nullptr) add(n->parent);
        break;
      case Axis::AncestorOrSelf:
        add(n);
        [[fallthrough]];
      case Axis::Ancestor:
        for (const Node* p = n->parent; p != nullptr; p = p->parent) add(p);
        break;
      case Axis::Attribute:
        for (const Node* a : n->attributes) add(a);
        break;
      case Axis::FollowingSibling:
        siblings(true);
        break;
      case Axis::PrecedingSibling:
        siblings(false);
        break;
    }
    return out;
  }
};

struct Path final : Query::Expr {
  enum class Start { Root, Context, Expression };
  Start start = Start::Context;
  ExprPtr source;
  std::vector<Step> steps;

  Value eval(const Ctx& ctx) const override {
    NodeSet current;
    switch (start) {
      case Start::Root: {
        const Node* root = ctx.node;
        while (root->parent != nullptr) root = root->parent;
        current.push_back(root);
        break;
      }
      case Start::Context:
        current.push_back(ctx.node);
        break;
      case Start::Expression:
        current = require_nodes(source->eval(ctx), "a path step");
        break;
    }
    for (const auto& step : steps) {
      NodeSet next;
      for (const Node* n : current) {
        auto selected = apply_predicates(step.candidates(n), step.predicates, ctx);
        next.insert(next.end(), selected.begin(), selected.end());
      }
      sort_document_order(next);
      current = std::move(next);
    }
    return current;
  }
};

struct Filter final : Query::Expr {
  ExprPtr primary;
  std::vector<ExprPtr> predicates;
  Value eval(const Ctx& ctx) const override {
    return apply_predicates(require_nodes(primary->eval(ctx), "a predicate"), predicates, ctx);
  }
};

// Code-point boundaries of a UTF-8 string, plus the end offset.
std::vector<std::size_t> char_offsets(const std::string& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) out.push_back(i);
  }
  out.push_back(s.size());
  return out;
}

using Builtin = std::function<Value(const Ctx&, const std::vector<ExprPtr>&)>;

struct FunctionSpec {
  std::size_t min_args;
  std::size_t max_args;
  Builtin fn;
};

const Node* first_node_or_context(const Ctx& ctx, const std::vector<ExprPtr>& args) {
  if (args.empty()) return ctx.node;
  const auto ns = require_nodes(args[0]->eval(ctx), "this function");
  return ns.empty() ? nullptr : ns.front();
}

std::string arg_string(const Ctx& ctx, const std::vector<ExprPtr>& args, std::size_t i) {
  if (i >= args.size()) return ctx.node->string_value();
  return to_string(args[i]->eval(ctx));
}

const std::vector<std::pair<std::string_view, FunctionSpec>>& function_table() {
  static const std::vector<std::pair<std::string_view, FunctionSpec>> table = {
      {"last", {0, 0, [](const Ctx& c, const auto&) -> Value { return double(c.size); }}},
      {"position", {0, 0, [](const Ctx& c, const auto&) -> Value { return double(c.position); }}},
      {"count",
       {1, 1,
        [](const Ctx& c, const auto& a) -> Value {
          const Value v = a[0]->eval(c);
          if (!is_sequence(v)) throw FilterEvaluationError("count() requires a sequence");
          return double(strings_of(v).size());
        }}},
      {"exists", {1, 1, [](const Ctx& c, const auto& a) -> Value {
                    return effective_boolean(a[0]->eval(c));
                  }}},
      {"empty", {1, 1, [](const Ctx& c, const auto& a) -> Value {
                   return !effective_boolean(a[0]->eval(c));
                 }}},
      {"name", {0, 1, [](const Ctx& c, const auto& a) -> Value {
                  const Node* n = first_node_or_context(c, a);
                  return n ? n->name : std::string();
                }}},
      {"local-name", {0, 1, [](const Ctx& c, const auto& a) -> Value {
                        const Node* n = first_node_or_context(c, a);
                        if (n == nullptr) return std::string();
                        const auto colon = n->name.find(':');
                        return colon == std::string::npos ? n->name : n->name.substr(colon + 1);
                      }}},
      {"string", {0, 1, [](const Ctx& c, const auto& a) -> Value { return arg_string(c, a, 0); }}},
      {"concat", {2, 64, [](const Ctx& c, const auto& a) -> Value {
                    std::string out;
                    for (const auto& e : a) out += to_string(e->eval(c));
                    return out;
                  }}},
      {"contains", {2, 2, [](const Ctx& c, const auto& a) -> Value {
                      return arg_string(c, a, 0).find(arg_string(c, a, 1)) != std::string::npos;
                    }}},
      {"starts-with", {2, 2, [](const Ctx& c, const auto& a) -> Value {
                         return arg_string(c, a, 0).starts_with(arg_string(c, a, 1));
                       }}},
      {"ends-with", {2, 2, [](const Ctx& c, const auto& a) -> Value {
                       return arg_string(c, a, 0).ends_with(arg_string(c, a, 1));
                     }}},
      {"substring-before", {2, 2, [](const Ctx& c, const auto& a) -> Value {
                              const auto s = arg_string(c, a, 0);
                              const auto pos = s.find(arg_string(c, a, 1));
                              return pos == std::string::npos ? std::string() : s.substr(0, pos);
                            }}},
      {"substring-after", {2, 2, [](const Ctx& c, const auto& a) -> Value {
                             const auto s = arg_string(c, a, 0);
                             const auto t = arg_string(c, a, 1);
                             const auto pos = s.find(t);
                             return pos == std::string::npos ? std::string() : s.substr(pos + t.size());
                           }}},
      {"substring",
       {2, 3,
        [](const Ctx& c, const auto& a) -> Value {
          const auto s = arg_string(c, a, 0);
          const auto offsets = char_offsets(s);
          const double chars = double(offsets.size() - 1);
          const double start = std::round(to_number(a[1]->eval(c)));
          const double end = a.size() > 2 ? start + std::round(to_number(a[2]->eval(c)))
                                          : std::numeric_limits<double>::infinity();
          // Characters at 1-based positions p with start <= p < end.
          const double lo = std::max(start, 1.0);
          const double hi = std::min(end, chars + 1);
          if (!(lo < hi)) return std::string();
          const auto b = offsets[static_cast<std::size_t>(lo) - 1];
          const auto e = offsets[static_cast<std::size_t>(hi) - 1];
          return s.substr(b, e - b);
        }}},
      {"string-length", {0, 1, [](const Ctx& c, const auto& a) -> Value {
                           return double(char_offsets(arg_string(c, a, 0)).size() - 1);
                         }}},
      {"normalize-space", {0, 1, [](const Ctx& c, const auto& a) -> Value {
                             std::string out;
                             bool gap = false;
                             for (char ch : arg_string(c, a, 0)) {
                               if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
                                 gap = !out.empty();
                               } else {
                                 if (gap) out += ' ';
                                 gap = false;
                                 out += ch;
                               }
                             }
                             return out;
                           }}},
      {"boolean", {1, 1, [](const Ctx& c, const auto& a) -> Value {
                     return effective_boolean(a[0]->eval(c));
                   }}},
      {"not", {1, 1, [](const Ctx& c, const auto& a) -> Value {
                 return !effective_boolean(a[0]->eval(c));
               }}},
      {"true", {0, 0, [](const Ctx&, const auto&) -> Value { return true; }}},
      {"false", {0, 0, [](const Ctx&, const auto&) -> Value { return false; }}},
      {"number", {0, 1, [](const Ctx& c, const auto& a) -> Value {
                    return a.empty() ? parse_number(c.node->string_value()) : to_number(a[0]->eval(c));
                  }}},
      {"sum", {1, 1, [](const Ctx& c, const auto& a) -> Value {
                 const Value v = a[0]->eval(c);
                 if (!is_sequence(v)) throw FilterEvaluationError("sum() requires a sequence");
                 double total = 0;
                 for (const auto& s : strings_of(v)) total += parse_number(s);
                 return total;
               }}},
      {"floor", {1, 1, [](const Ctx& c, const auto& a) -> Value {
                   return std::floor(to_number(a[0]->eval(c)));
                 }}},
      {"ceiling", {1, 1, [](const Ctx& c, const auto& a) -> Value {
                     return std::ceil(to_number(a[0]->eval(c)));
                   }}},
      {"round", {1, 1, [](const Ctx& c, const auto& a) -> Value {
                   return std::floor(to_number(a[0]->eval(c)) + 0.5);
                 }}},
  };
  return table;
}

struct FunctionCall final : Query::Expr {
  const FunctionSpec* spec;
  std::vector<ExprPtr> args;
  FunctionCall(const FunctionSpec* s, std::vector<ExprPtr> a) : spec(s), args(std::move(a)) {}
  Value eval(const Ctx& ctx) const override { return spec->fn(ctx, args); }
};

struct Flwor final : Query::Expr {
  struct Clause {
    bool is_for;
    std::string var;
    ExprPtr expr;
  };
  std::vector<Clause> clauses;
  ExprPtr where;
  ExprPtr ret;

  Value eval(const Ctx& ctx) const override {
    NodeSet nodes;
    AtomicSequence atoms;
    bool atomic = false;
    run(ctx, 0, ctx.vars, nodes, atoms, atomic);
    if (!atomic) return nodes;
    return atoms;
  }

 private:
  void emit(const Value& v, NodeSet& nodes, AtomicSequence& atoms, bool& atomic) const {
    if (const auto* ns = std::get_if<NodeSet>(&v)) {
      nodes.insert(nodes.end(), ns->begin(), ns->end());
      for (const Node* n : *ns) atoms.items.push_back(n->string_value());
    } else {
      atomic = true;
      if (const auto* seq = std::get_if<AtomicSequence>(&v)) {
        atoms.items.insert(atoms.items.end(), seq->items.begin(), seq->items.end());
      } else {
        atoms.items.push_back(to_string(v));
      }
    }
  }

  void run(const Ctx& ctx, std::size_t i, const Binding* vars, NodeSet& nodes,
           AtomicSequence& atoms, bool& atomic) const {
    const Ctx here{ctx.node, ctx.position, ctx.size, vars};
    if (i == clauses.size()) {
      if (where && !effective_boolean(where->eval(here))) return;
      emit(ret->eval(here), nodes, atoms, atomic);
      return;
    }
    const auto& clause = clauses[i];
    Value seq = clause.expr->eval(here);
    if (!clause.is_for) {
      const Binding b{clause.var, std::move(seq), vars};
      run(ctx, i + 1, &b, nodes, atoms, atomic);
      return;
    }
    if (const auto* ns = std::get_if<NodeSet>(&seq)) {
      for (const Node* n : *ns) {
        const Binding b{clause.var, NodeSet{n}, vars};
        run(ctx, i + 1, &b, nodes, atoms, atomic);
      }
    } else if (const auto* items = std::get_if<AtomicSequence>(&seq)) {
      for (const auto& s : items->items) {
        const Binding b{clause.var, s, vars};
        run(ctx, i + 1, &b, nodes, atoms, atomic);
      }
    } else {
      const Binding b{clause.var, seq, vars};
      run(ctx, i + 1, &b, nodes, atoms, atomic);
    }
  }
};

// ---------------------------------------------------------------------------
// Lexer and parser

enum class Tok { Name, Var, String, Number, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0;
  std::size_t offset = 0;
};

bool name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}
bool name_char(char c) {
  return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) {
    throw InvalidExpression(why + " at offset " + std::to_string(i) + " in '" + std::string(s) + "'");
  };
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    Token t;
    t.offset = i;
    if (c == '"' || c == '\'') {
      const auto end = s.find(c, i + 1);
      if (end == std::string_view::npos) fail("unterminated string literal");
      t.kind = Tok::String;
      t.text = std::string(s.substr(i + 1, end - i - 1));
      i = end + 1;
    } else if ((c >= '0' && c <= '9') || (c == '.' && i + 1 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '9')) {
      std::size_t j = i;
      while (j < s.size() && ((s[j] >= '0' && s[j] <= '9') || s[j] == '.')) ++j;
      t.kind = Tok::Number;
      t.text = std::string(s.substr(i, j - i));
      t.number = parse_number(t.text);
      if (std::isnan(t.number)) fail("bad number");
      i = j;
    } else if (c == '$') {
      std::size_t j = i + 1;
      if (j >= s.size() || !name_start(s[j])) fail("bad variable name");
      while (j < s.size() && name_char(s[j])) ++j;
      t.kind = Tok::Var;
      t.text = std::string(s.substr(i + 1, j - i - 1));
      i = j;
    } else if (name_start(c)) {
      std::size_t j = i;
      while (j < s.size() && name_char(s[j])) ++j;
      // QName prefix, but not an axis separator.
      if (j + 1 < s.size() && s[j] == ':' && s[j + 1] != ':' && name_start(s[j + 1])) {
        ++j;
        while (j < s.size() && name_char(s[j])) ++j;
      }
      t.kind = Tok::Name;
      t.text = std::string(s.substr(i, j - i));
      i = j;
    } else {
      static constexpr std::string_view kTwo[] = {"//", "..", "::", "!=", "<=", ">=", ":="};
      t.kind = Tok::Op;
      for (auto op : kTwo) {
        if (s.substr(i, 2) == op) {
          t.text = std::string(op);
          break;
        }
      }
      if (t.text.empty()) {
        if (std::string_view("/()[].@,|+-=<>*").find(c) == std::string_view::npos) {
          fail(std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
      i += t.text.size();
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.offset = s.size();
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, Query::Dialect dialect)
      : text_(text), tokens_(tokenize(text)), xquery_(dialect == Query::Dialect::XQuery) {}

  ExprPtr parse() {
    auto e = expr_single();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  bool is_op(std::string_view op, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Op && peek(ahead).text == op;
  }
  bool is_name(std::string_view name, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Name && peek(ahead).text == name;
  }
  Token take() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& why) const {
    throw InvalidExpression(why + " at offset " + std::to_string(peek().offset) + " in '" +
                            std::string(text_) + "'");
  }
  void expect_op(std::string_view op) {
    if (!is_op(op)) fail("expected '" + std::string(op) + "'");
    ++pos_;
  }
  void expect_name(std::string_view name) {
    if (!is_name(name)) fail("expected '" + std::string(name) + "'");
    ++pos_;
  }

  ExprPtr expr_single() {
    if (xquery_ && (is_name("for") || is_name("let")) && peek(1).kind == Tok::Var) return flwor();
    return or_expr();
  }

  ExprPtr flwor() {
    auto node = std::make_unique<Flwor>();
    while ((is_name("for") || is_name("let")) && peek(1).kind == Tok::Var) {
      const bool is_for = take().text == "for";
      do {
        if (peek().kind != Tok::Var) fail("expected variable");
        auto var = take().text;
        if (is_for) {
          expect_name("in");
        } else {
          expect_op(":=");
        }
        node->clauses.push_back({is_for, std::move(var), expr_single()});
      } while (is_op(",") && (++pos_, true));
    }
    if (is_name("where")) {
      ++pos_;
      node->where = expr_single();
    }
    expect_name("return");
    node->ret = expr_single();
    return node;
  }

  template <typename Next>
  ExprPtr left_assoc(Next next, const std::vector<std::pair<std::string_view, BinOp>>& ops) {
    auto lhs = (this->*next)();
    for (;;) {
      const BinOp* found = nullptr;
      for (const auto& [text, op] : ops) {
        const Token& t = peek();
        const bool word = text.front() >= 'a' && text.front() <= 'z';
        if (word ? (t.kind == Tok::Name && t.text == text) : (t.kind == Tok::Op && t.text == text)) {
          found = &op;
          break;
        }
      }
      if (found == nullptr) return lhs;
      ++pos_;
      lhs = std::make_unique<Binary>(*found, std::move(lhs), (this->*next)());
    }
  }

  ExprPtr or_expr() { return left_assoc(&Parser::and_expr, {{"or", BinOp::Or}}); }
  ExprPtr and_expr() { return left_assoc(&Parser::equality_expr, {{"and", BinOp::And}}); }
  ExprPtr equality_expr() {
    std::vector<std::pair<std::string_view, BinOp>> ops = {{"=", BinOp::Eq}, {"!=", BinOp::Ne}};
    if (xquery_) ops.insert(ops.end(), {{"eq", BinOp::Eq}, {"ne", BinOp::Ne}});
    return left_assoc(&Parser::relational_expr, ops);
  }
  ExprPtr relational_expr() {
    std::vector<std::pair<std::string_view, BinOp>> ops = {
        {"<", BinOp::Lt}, {"<=", BinOp::Le}, {">", BinOp::Gt}, {">=", BinOp::Ge}};
    if (xquery_) {
      ops.insert(ops.end(), {{"lt", BinOp::Lt}, {"le", BinOp::Le}, {"gt", BinOp::Gt}, {"ge", BinOp::Ge}});
    }
    return left_assoc(&Parser::additive_expr, ops);
  }
  ExprPtr additive_expr() {
    return left_assoc(&Parser::multiplicative_expr, {{"+", BinOp::Add}, {"-", BinOp::Sub}});
  }
  ExprPtr multiplicative_expr() {
    return left_assoc(&Parser::unary_expr, {{"*", BinOp::Mul}, {"div", BinOp::Div}, {"mod", BinOp::Mod}});
  }
  ExprPtr unary_expr() {
    if (is_op("-")) {
      ++pos_;
      return std::make_unique<Negate>(unary_expr());
    }
    auto lhs = path_expr();
    while (is_op("|")) {
      ++pos_;
      lhs = std::make_unique<Union>(std::move(lhs), path_expr());
    }
    return lhs;
  }

  static bool node_type(std::string_view name) { return name == "text" || name == "node"; }

  bool starts_step() const {
    const Token& t = peek();
    if (t.kind == Tok::Name) return !is_op("(", 1) || node_type(t.text);
    return is_op("*") || is_op(".") || is_op("..") || is_op("@");
  }

  bool starts_primary() const {
    const Token& t = peek();
    if (t.kind == Tok::Var || t.kind == Tok::String || t.kind == Tok::Number) return true;
    if (is_op("(")) return true;
    return t.kind == Tok::Name && is_op("(", 1) && !node_type(t.text);
  }

  ExprPtr path_expr() {
    auto path = std::make_unique<Path>();
    if (is_op("/")) {
      ++pos_;
      path->start = Path::Start::Root;
      if (starts_step()) relative_path(*path);
      return path;
    }
    if (is_op("//")) {
      ++pos_;
      path->start = Path::Start::Root;
      path->steps.push_back(descendant_or_self());
      relative_path(*path);
      return path;
    }
    if (starts_primary()) {
      auto filter = std::make_unique<Filter>();
      filter->primary = primary_expr();
      while (is_op("[")) filter->predicates.push_back(predicate());
      ExprPtr base;
      if (filter->predicates.empty()) {
        base = std::move(filter->primary);
      } else {
        base = std::move(filter);
      }
      if (!is_op("/") && !is_op("//")) return base;
      path->start = Path::Start::Expression;
      path->source = std::move(base);
      if (is_op("//")) path->steps.push_back(descendant_or_self());
      ++pos_;
      relative_path(*path);
      return path;
    }
    path->start = Path::Start::Context;
    relative_path(*path);
    return path;
  }

  static Step descendant_or_self() {
    Step s;
    s.axis = Axis::DescendantOrSelf;
    s.test = TestKind::AnyNode;
    return s;
  }

  void relative_path(Path& path) {
    path.steps.push_back(step());
    while (is_op("/") || is_op("//")) {
      if (is_op("//")) path.steps.push_back(descendant_or_self());
      ++pos_;
      path.steps.push_back(step());
    }
  }

  Step step() {
    Step s;
    if (is_op(".")) {
      ++pos_;
      s.axis = Axis::Self;
      s.test = TestKind::AnyNode;
      return s;
    }
    if (is_op("..")) {
      ++pos_;
      s.axis = Axis::Parent;
      s.test = TestKind::AnyNode;
      return s;
    }
    if (is_op("@")) {
      ++pos_;
      s.axis = Axis::Attribute;
    } else if (peek().kind == Tok::Name && is_op("::", 1)) {
      static const std::vector<std::pair<std::string_view, Axis>> kAxes = {
          {"child", Axis::Child},
          {"descendant", Axis::Descendant},
          {"descendant-or-self", Axis::DescendantOrSelf},
          {"self", Axis::Self},
          {"parent", Axis::Parent},
          {"ancestor", Axis::Ancestor},
          {"ancestor-or-self", Axis::AncestorOrSelf},
          {"attribute", Axis::Attribute},
          {"following-sibling", Axis::FollowingSibling},
          {"preceding-sibling", Axis::PrecedingSibling},
      };
      const auto name = take().text;
      const auto it = std::find_if(kAxes.begin(), kAxes.end(), [&](const auto& a) { return a.first == name; });
      if (it == kAxes.end()) fail("unsupported axis '" + name + "'");
      s.axis = it->second;
      ++pos_;  // '::'
    }

    if (is_op("*")) {
      ++pos_;
      s.test = TestKind::AnyName;
    } else if (peek().kind == Tok::Name) {
      auto name = take().text;
      if (node_type(name) && is_op("(")) {
        ++pos_;
        expect_op(")");
        s.test = name == "text" ? TestKind::Text : TestKind::AnyNode;
      } else {
        s.test = TestKind::Name;
        s.name = std::move(name);
      }
    } else {
      fail("expected a node test");
    }
    while (is_op("[")) s.predicates.push_back(predicate());
    return s;
  }

  ExprPtr predicate() {
    expect_op("[");
    auto e = expr_single();
    expect_op("]");
    return e;
  }

  ExprPtr primary_expr() {
    const Token t = take();
    switch (t.kind) {
      case Tok::Var:
        return std::make_unique<VarRef>(t.text);
      case Tok::String:
        return std::make_unique<Literal>(t.text);
      case Tok::Number:
        return std::make_unique<Literal>(t.number);
      case Tok::Op: {
        auto e = expr_single();
        expect_op(")");
        return e;
      }
      case Tok::Name:
        break;
      case Tok::End:
        fail("unexpected end of expression");
    }
    std::string name = t.text;
    if (name.starts_with("fn:")) name.erase(0, 3);
    const auto& table = function_table();
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == name; });
    if (it == table.end()) fail("unknown function '" + t.text + "'");
    expect_op("(");
    std::vector<ExprPtr> args;
    if (!is_op(")")) {
      args.push_back(expr_single());
      while (is_op(",")) {
        ++pos_;
        args.push_back(expr_single());
      }
    }
    expect_op(")");
    if (args.size() < it->second.min_args || args.size() > it->second.max_args) {
      fail("wrong number of arguments to " + name + "()");
    }
    return std::make_unique<FunctionCall>(&it->second, std::move(args));
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  bool xquery_;
};

}  // namespace

Query::Query(std::string_view text, Dialect dialect) : root_(Parser(text, dialect).parse()) {}
Query::~Query() = default;
Query::Query(Query&&) noexcept = default;
Query& Query::operator=(Query&&) noexcept = default;

Value Query::evaluate(const Document& doc) const {
  const Ctx ctx{&doc.root(), 1, 1, nullptr};
  return root_->eval(ctx);
}

}  // namespace wikimpact::xml
