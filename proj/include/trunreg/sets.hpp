#pragma once

#include "trunreg/types.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace trunreg {

/// Closed interval [lo, hi]; either endpoint may be infinite.
struct Interval {
  double lo;
  double hi;
};

/// Sorted, pairwise disjoint union of closed intervals.
class IntervalUnion {
 public:
  /// Throws ValidationError unless intervals are sorted with hi_i < lo_{i+1}
  /// and lo <= hi within each interval.
  explicit IntervalUnion(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool contains(double z) const;

 private:
  std::vector<Interval> intervals_;
};

/// A set known only through its membership predicate. The optional envelope is
/// an interval containing the set, used to tighten rejection sampling.
struct OracleSet {
  std::function<bool(double)> contains;
  std::optional<Interval> envelope;
};

class TruncationSet {
 public:
  TruncationSet(IntervalUnion set) : set_(std::move(set)) {}  // NOLINT
  TruncationSet(OracleSet set);                               // NOLINT

  static TruncationSet real_line();
  static TruncationSet half_line(double from);
  static TruncationSet intervals(std::vector<Interval> intervals);

  bool is_interval_union() const { return std::holds_alternative<IntervalUnion>(set_); }
  /// Throws ValidationError for oracle-only sets.
  const IntervalUnion& interval_union() const;
  const OracleSet& oracle() const;

 private:
  std::variant<IntervalUnion, OracleSet> set_;
};

struct GaussianParams {
  double mean = 0.0;
  double variance = 1.0;
};

bool membership(const TruncationSet& set, double z);

/// log(Phi(hi) - Phi(lo)) for the standard normal, accurate in relative terms
/// down to masses near the smallest normal double. Returns -inf when lo == hi.
double log_std_normal_mass(double lo, double hi);

/// log of the upper tail P(Z > x) of the standard normal.
double log_std_normal_tail(double x);

/// log of the standard normal density.
double log_std_normal_pdf(double x);

/// log N(mean, variance; set). Requires an interval union.
double log_gaussian_mass(const GaussianParams& g, const TruncationSet& set);
double gaussian_mass(const GaussianParams& g, const TruncationSet& set);

/// alpha(w, x; S) = N(w^T x, 1; S).
double survival_probability(const Vector& w, const Vector& x, const TruncationSet& set);

/// Monte Carlo fraction of Gaussian draws landing in the set; works for any set.
double empirical_mass(const GaussianParams& g, const TruncationSet& set, std::size_t n_draws,
                      Rng& rng);

/// {"type":"intervals","intervals":[[a,b],...]} or {"type":"halfline","from":a};
/// endpoints may be the strings "-inf" / "inf".
TruncationSet parse_set(const nlohmann::json& j);
nlohmann::json set_to_json(const TruncationSet& set);

}  // namespace trunreg
