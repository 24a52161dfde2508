#include "trunreg/sets.hpp"

#include "trunreg/logspace.hpp"
#include "trunreg/random.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace trunreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kSqrt1_2 = 0.70710678118654752440;

// Continued fraction for the Mills ratio Q(x)/phi(x); used where erfc underflows.
double mills_ratio_far_tail(double x) {
  double t = x;
  for (int k = 60; k >= 1; --k) t = x + k / t;
  return 1.0 / t;
}

// Mass of [lo, hi] for 0 <= lo < hi < inf when Q(hi)/Q(lo) > 1/2, where the
// tail difference would cancel. Integrates phi(lo) * exp(-lo s - s^2/2) over
// s in [0, hi - lo]; the exponent changes by O(1) there.
double log_narrow_mass(double lo, double hi) {
  const double h = hi - lo;
  auto integrand = [lo](double s) { return std::exp(-lo * s - 0.5 * s * s); };
  const double integral = boost::math::quadrature::gauss<double, 20>::integrate(integrand, 0.0, h);
  return log_std_normal_pdf(lo) + std::log(integral);
}

double parse_endpoint(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ValidationError("unrecognized endpoint string '" + s + "'");
  }
  if (!j.is_number()) throw ValidationError("interval endpoint must be a number or \"inf\"/\"-inf\"");
  return j.get<double>();
}

nlohmann::json endpoint_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

}  // namespace

IntervalUnion::IntervalUnion(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  if (intervals_.empty()) throw ValidationError("interval union must contain at least one interval");
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || !(iv.lo <= iv.hi))
      throw ValidationError("interval " + std::to_string(i) + " has lo > hi or NaN endpoints");
    if (iv.lo == kInf || iv.hi == -kInf)
      throw ValidationError("interval " + std::to_string(i) + " is empty at infinity");
    if (i > 0 && !(intervals_[i - 1].hi < iv.lo))
      throw ValidationError("intervals must be sorted and pairwise disjoint");
  }
}

bool IntervalUnion::contains(double z) const {
  // First interval whose lo exceeds z; the candidate is the one before it.
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), z,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  return z <= std::prev(it)->hi;
}

TruncationSet::TruncationSet(OracleSet set) : set_(std::move(set)) {
  if (!std::get<OracleSet>(set_).contains) throw ValidationError("oracle set needs a membership predicate");
}

TruncationSet TruncationSet::real_line() { return IntervalUnion({{-kInf, kInf}}); }
TruncationSet TruncationSet::half_line(double from) { return IntervalUnion({{from, kInf}}); }
TruncationSet TruncationSet::intervals(std::vector<Interval> intervals) {
  return IntervalUnion(std::move(intervals));
}

const IntervalUnion& TruncationSet::interval_union() const {
  if (const auto* u = std::get_if<IntervalUnion>(&set_)) return *u;
  throw ValidationError("operation requires an interval-union truncation set");
}

const OracleSet& TruncationSet::oracle() const {
  if (const auto* o = std::get_if<OracleSet>(&set_)) return *o;
  throw ValidationError("truncation set is not oracle-only");
}

bool membership(const TruncationSet& set, double z) {
  if (set.is_interval_union()) return set.interval_union().contains(z);
  return set.oracle().contains(z);
}

double log_std_normal_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double log_std_normal_tail(double x) {
  if (x == kInf) return -kInf;
  if (x == -kInf) return 0.0;
  if (x < -5.0) return std::log1p(-0.5 * std::erfc(-x * kSqrt1_2));
  if (x < 37.0) return std::log(0.5 * std::erfc(x * kSqrt1_2));
  return log_std_normal_pdf(x) + std::log(mills_ratio_far_tail(x));
}

double log_std_normal_mass(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) throw ValidationError("log_std_normal_mass: need lo <= hi");
  if (lo == hi) return -kInf;
  if (hi <= 0.0) return log_std_normal_mass(-hi, -lo);
  if (lo < 0.0) {
    // Straddles zero: both erf terms are positive, no cancellation.
    return std::log(0.5 * (std::erf(hi * kSqrt1_2) + std::erf(-lo * kSqrt1_2)));
  }
  const double log_lo = log_std_normal_tail(lo);
  const double log_hi = log_std_normal_tail(hi);
  const double diff = log_hi - log_lo;
  if (diff < -std::numbers::ln2) return log_lo + std::log1p(-std::exp(diff));
  return log_narrow_mass(lo, hi);
}

double log_gaussian_mass(const GaussianParams& g, const TruncationSet& set) {
  if (!(g.variance > 0.0) || !std::isfinite(g.variance)) throw ValidationError("variance must be positive");
  const double sigma = std::sqrt(g.variance);
  const auto& ivs = set.interval_union().intervals();
  std::vector<double> logs;
  logs.reserve(ivs.size());
  for (const auto& iv : ivs) logs.push_back(log_std_normal_mass((iv.lo - g.mean) / sigma, (iv.hi - g.mean) / sigma));
  return log_sum_exp(logs);
}

double gaussian_mass(const GaussianParams& g, const TruncationSet& set) {
  return std::exp(log_gaussian_mass(g, set));
}

double survival_probability(const Vector& w, const Vector& x, const TruncationSet& set) {
  if (w.size() != x.size()) throw ValidationError("survival_probability: dimension mismatch");
  return gaussian_mass({w.dot(x), 1.0}, set);
}

double empirical_mass(const GaussianParams& g, const TruncationSet& set, std::size_t n_draws, Rng& rng) {
  if (n_draws == 0) throw ValidationError("empirical_mass: n_draws must be >= 1");
  if (!(g.variance > 0.0)) throw ValidationError("variance must be positive");
  const double sigma = std::sqrt(g.variance);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_draws; ++i)
    if (membership(set, g.mean + sigma * standard_normal(rng))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n_draws);
}

TruncationSet parse_set(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) throw ValidationError("set spec must be an object with a \"type\"");
  const auto type = j.at("type").get<std::string>();
  if (type == "halfline") {
    if (!j.contains("from")) throw ValidationError("halfline set needs \"from\"");
    return TruncationSet::half_line(parse_endpoint(j.at("from")));
  }
  if (type == "intervals") {
    if (!j.contains("intervals") || !j.at("intervals").is_array())
      throw ValidationError("intervals set needs an \"intervals\" array");
    std::vector<Interval> ivs;
    for (const auto& pair : j.at("intervals")) {
      if (!pair.is_array() || pair.size() != 2) throw ValidationError("each interval must be a pair [a, b]");
      ivs.push_back({parse_endpoint(pair[0]), parse_endpoint(pair[1])});
    }
    return TruncationSet::intervals(std::move(ivs));
  }
  throw ValidationError("unknown set type '" + type + "'");
}

nlohmann::json set_to_json(const TruncationSet& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& iv : set.interval_union().intervals())
    arr.push_back({endpoint_to_json(iv.lo), endpoint_to_json(iv.hi)});
  return {{"type", "intervals"}, {"intervals", arr}};
}

}  // namespace trunreg
