#include "wikimpact/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wikimpact {

Contributor Contributor::registered(std::optional<std::uint64_t> user_id, std::string username) {
  Contributor c;
  c.user_id = user_id;
  c.username = std::move(username);
  c.kind = ContributorKind::Registered;
  return c;
}

Contributor Contributor::anonymous(std::string ip) {
  Contributor c;
  c.ip = std::move(ip);
  c.username = std::string(kAnonymousUsername);
  c.kind = ContributorKind::Anonymous;
  return c;
}

Contributor Contributor::deleted() { return Contributor{}; }

std::string_view Contributor::identity_string() const noexcept {
  switch (kind) {
    case ContributorKind::Registered:
      return username ? std::string_view(*username) : std::string_view();
    case ContributorKind::Anonymous:
      return kAnonymousUsername;
    case ContributorKind::Deleted:
      break;
  }
  return kDeletedIdentity;
}

namespace {

std::int64_t saturating_add(std::int64_t a, std::int64_t b) noexcept {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    return b > 0 ? std::numeric_limits<std::int64_t>::max()
                 : std::numeric_limits<std::int64_t>::min();
  }
  return out;
}

}  // namespace

std::int64_t identifier(const Contributor& c) noexcept {
  std::int64_t hash = 0;
  std::int64_t index = 1;
  for (char ch : c.identity_string()) {
    const auto byte = static_cast<std::int64_t>(static_cast<std::int8_t>(ch));
    hash = saturating_add(hash, byte * index);
    ++index;
  }
  return hash;
}

bool identity_matches(const Contributor& a, const Contributor& b) noexcept {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ContributorKind::Registered:
      if (a.user_id && b.user_id) return *a.user_id == *b.user_id;
      return a.username && b.username && *a.username == *b.username;
    case ContributorKind::Anonymous:
      return a.ip && b.ip && *a.ip == *b.ip;
    case ContributorKind::Deleted:
      return true;
  }
  return false;
}

const Revision* Page::parent_of(const Revision& r) const noexcept {
  if (r.within_page_id < 2 || r.within_page_id > revisions.size()) return nullptr;
  return &revisions[r.within_page_id - 2];
}

const Revision* Page::child_of(const Revision& r) const noexcept {
  if (r.within_page_id == 0 || r.within_page_id >= revisions.size()) return nullptr;
  return &revisions[r.within_page_id];
}

RelevanceScore::RelevanceScore(std::int64_t subject_id, std::string label, double score)
    : subject_id(subject_id), label(std::move(label)), score(score) {
  if (!std::isfinite(score)) {
    throw std::invalid_argument("relevance score must be finite");
  }
}

DifferenceValue::DifferenceValue(double value) : value_(value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("difference value must be finite");
  }
}

}  // namespace wikimpact
