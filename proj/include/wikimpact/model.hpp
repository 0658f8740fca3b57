#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wikimpact {

/// Username assigned to every anonymous contributor. It contains characters
/// ('#', '<', '>') that MediaWiki refuses in account names, so it can never
/// collide with a registered user.
inline constexpr std::string_view kAnonymousUsername = "##<<__-=ANONYMOUS=-__>>##";

/// Identity string used for contributors whose account was suppressed
/// (`<contributor deleted="deleted" />`).
inline constexpr std::string_view kDeletedIdentity = "##DELETED##";

enum class ContributorKind { Registered, Anonymous, Deleted };

/// Author of a revision. Construct through the named factories so the
/// per-kind invariants hold.
struct Contributor {
  std::optional<std::uint64_t> user_id;
  std::optional<std::string> username;
  std::optional<std::string> ip;
  ContributorKind kind = ContributorKind::Deleted;

  static Contributor registered(std::optional<std::uint64_t> user_id, std::string username);
  static Contributor anonymous(std::string ip);
  static Contributor deleted();

  /// The string the identifier hash is computed over.
  std::string_view identity_string() const noexcept;

  bool operator==(const Contributor&) const = default;
};

/// Position-weighted byte sum over the identity string: sum of b_k * k for
/// the k-th byte (1-based). Bytes are taken as signed 8-bit values, the same
/// arithmetic a JVM `byte` performs. Accumulation saturates at the int64
/// limits instead of wrapping.
std::int64_t identifier(const Contributor& c) noexcept;

/// Whether two contributors count as the same author for the purpose of
/// collapsing consecutive revisions.
///
/// Kinds must agree. Registered authors compare by user id when both ids are
/// present and by username otherwise; anonymous authors compare by IP; all
/// deleted authors are equal to each other.
bool identity_matches(const Contributor& a, const Contributor& b) noexcept;

struct Pageview {
  std::string project_name;
  std::string page_title;
  std::uint64_t request_count = 0;
  std::uint64_t request_size = 0;

  bool operator==(const Pageview&) const = default;
};

struct Revision {
  std::uint64_t id = 0;
  std::optional<std::uint64_t> parent_id;
  std::optional<std::string> timestamp;
  std::string text;
  Contributor contributor;
  /// 1-based position among the retained revisions of the page.
  std::uint32_t within_page_id = 0;

  bool operator==(const Revision&) const = default;
};

struct Page {
  std::uint64_t id = 0;
  std::string title;
  std::int64_t ns = 0;
  std::vector<Revision> revisions;
  std::optional<Pageview> pageview;

  /// Retained revision preceding `r`, or nullptr for the first one.
  const Revision* parent_of(const Revision& r) const noexcept;
  /// Retained revision following `r`, or nullptr for the last one.
  const Revision* child_of(const Revision& r) const noexcept;

  bool operator==(const Page&) const = default;
};

/// (subject, score) pair; the unit of rankings and of the aggregation algebra.
struct RelevanceScore {
  std::int64_t subject_id = 0;
  std::string label;
  double score = 0.0;

  RelevanceScore() = default;
  /// Throws std::invalid_argument when `score` is NaN or infinite.
  RelevanceScore(std::int64_t subject_id, std::string label, double score);

  bool operator==(const RelevanceScore&) const = default;
};

/// Optional numeric difference between two revisions.
class DifferenceValue {
 public:
  DifferenceValue() = default;
  /// Throws std::invalid_argument for non-finite values.
  explicit DifferenceValue(double value);

  bool has_value() const noexcept { return value_.has_value(); }
  double value() const { return value_.value(); }
  double value_or(double fallback) const noexcept { return value_.value_or(fallback); }

  bool operator==(const DifferenceValue&) const = default;

 private:
  std::optional<double> value_;
};

}  // namespace wikimpact
