#include "wikimpact/scores.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "wikimpact/error.hpp"

namespace wikimpact {
namespace {

double apply(double x, double y, ArithOp op) {
  switch (op) {
    case ArithOp::Add:
      return x + y;
    case ArithOp::Sub:
      return x - y;
    case ArithOp::Mul:
      return x * y;
    case ArithOp::Div:
      return x / y;
  }
  return 0.0;
}

std::vector<const RelevanceScore*> by_subject(const std::vector<RelevanceScore>& a) {
  std::vector<const RelevanceScore*> out;
  out.reserve(a.size());
  for (const auto& s : a) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(),
                   [](const RelevanceScore* x, const RelevanceScore* y) { return x->subject_id < y->subject_id; });
  return out;
}

}  // namespace

std::int64_t anonymous_subject_id() noexcept { return identifier(Contributor::anonymous("")); }

std::vector<RelevanceScore> join_op(const std::vector<RelevanceScore>& a, const std::vector<RelevanceScore>& b,
                                    ArithOp op) {
  std::map<std::int64_t, double> right;
  for (const auto& s : b) right.emplace(s.subject_id, s.score);
  std::vector<RelevanceScore> out;
  for (const RelevanceScore* s : by_subject(a)) {
    const auto it = right.find(s->subject_id);
    if (it == right.end()) continue;
    if (op == ArithOp::Div && it->second == 0.0) throw DivisionByZero(s->subject_id);
    out.emplace_back(s->subject_id, s->label, apply(s->score, it->second, op));
  }
  return out;
}

std::vector<RelevanceScore> scalar_op(std::vector<RelevanceScore> a, double alpha, ArithOp op) {
  if (op == ArithOp::Div && alpha == 0.0) {
    throw DivisionByZero(a.empty() ? 0 : a.front().subject_id);
  }
  for (auto& s : a) s = RelevanceScore(s.subject_id, std::move(s.label), apply(s.score, alpha, op));
  return a;
}

double aggregate(const std::vector<RelevanceScore>& a, AggregateKind kind) {
  if (kind == AggregateKind::Sum) {
    double sum = 0.0;
    for (const RelevanceScore* s : by_subject(a)) sum += s->score;
    return sum;
  }
  if (a.empty()) throw EmptyCollection("min/max of an empty score collection");
  const auto cmp = [](const RelevanceScore& x, const RelevanceScore& y) { return x.score < y.score; };
  return kind == AggregateKind::Min ? std::min_element(a.begin(), a.end(), cmp)->score
                                    : std::max_element(a.begin(), a.end(), cmp)->score;
}

std::vector<RankedScore> rank(std::vector<RelevanceScore> a, bool drop_zero, bool drop_anonymous) {
  const std::int64_t anonymous = anonymous_subject_id();
  std::erase_if(a, [&](const RelevanceScore& s) {
    return (drop_zero && s.score == 0.0) || (drop_anonymous && s.subject_id == anonymous);
  });
  std::sort(a.begin(), a.end(), [](const RelevanceScore& x, const RelevanceScore& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.subject_id != y.subject_id) return x.subject_id < y.subject_id;
    return x.label < y.label;
  });
  std::vector<RankedScore> out;
  out.reserve(a.size());
  for (auto& s : a) out.push_back({out.size() + 1, std::move(s)});
  return out;
}

std::size_t h_index(std::vector<std::uint64_t> citations) {
  std::sort(citations.begin(), citations.end(), std::greater<>());
  std::size_t h = 0;
  while (h < citations.size() && citations[h] >= h + 1) ++h;
  return h;
}

}  // namespace wikimpact
