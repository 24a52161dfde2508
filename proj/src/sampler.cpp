#include "trunreg/sampler.hpp"

#include "trunreg/logspace.hpp"
#include "trunreg/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace trunreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDoublings = 1100;

// Standardized right-tail case, 0 <= lo < hi: solve log mass(t, hi) = log(u) + log mass(lo, hi).
double invert_right_tail(double lo, double hi, double u, double eta) {
  const double log_total = log_std_normal_mass(lo, hi);
  if (!std::isfinite(log_total)) throw NumericError("interval mass underflows the log-space range");
  const double target = -(std::log(u) + log_total);
  const double hazard = std::exp(log_std_normal_pdf(lo) - log_total);
  auto f = [hi](double t) { return t >= hi ? kInf : -log_std_normal_mass(t, hi); };
  return invert_monotone(f, target, {hazard}, eta, {lo, hi}, lo);
}

// Standardized interval straddling zero: the CDF needs no log space.
double invert_central(double lo, double hi, double u, double eta) {
  const double total = std::exp(log_std_normal_mass(lo, hi));
  const double density_floor = std::min(std::exp(log_std_normal_pdf(lo)), std::exp(log_std_normal_pdf(hi)));
  auto f = [lo, total](double t) { return t <= lo ? 0.0 : std::exp(log_std_normal_mass(lo, t)) / total; };
  return invert_monotone(f, u, {std::max(density_floor / total, 1e-300)}, eta, {lo, hi}, 0.0);
}

}  // namespace

void SamplerAccuracy::validate() const {
  if (!(tv_budget > 0.0 && tv_budget < 1.0)) throw ValidationError("tv_budget must lie in (0, 1)");
  if (!(inversion_tolerance > 0.0)) throw ValidationError("inversion_tolerance must be positive");
  if (max_rejection_draws < 1) throw ValidationError("max_rejection_draws must be >= 1");
}

double invert_monotone(const std::function<double(double)>& f, double y, DerivativeBounds bounds, double eta,
                       Bracket domain, double start) {
  if (!(bounds.lower > 0.0) || bounds.upper < bounds.lower) throw ValidationError("invert_monotone: need 0 < ell <= L");
  if (!(eta > 0.0)) throw ValidationError("invert_monotone: eta must be positive");
  const double eta_f = bounds.lower * eta;
  start = std::clamp(start, domain.lo, domain.hi);
  if (!std::isfinite(start)) start = 0.0;

  double lo = domain.lo;
  if (!std::isfinite(lo)) {
    lo = start;
    double step = 1.0;
    int n = 0;
    while (f(lo) > y - eta_f) {
      if (++n > kMaxDoublings) throw NumericError("invert_monotone: no lower bracket (bad derivative bounds?)");
      lo -= step;
      step *= 2.0;
    }
  }
  double hi = domain.hi;
  if (!std::isfinite(hi)) {
    hi = std::max(start, lo);
    double step = 1.0;
    int n = 0;
    while (f(hi) < y + eta_f) {
      if (++n > kMaxDoublings) throw NumericError("invert_monotone: no upper bracket (bad derivative bounds?)");
      hi += step;
      step *= 2.0;
    }
  }

  double mid = lo + 0.5 * (hi - lo);
  while (hi - lo > 2.0 * eta) {
    mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (std::abs(fm - y) <= eta_f) return mid;
    if (fm < y) lo = mid;
    else hi = mid;
  }
  return lo + 0.5 * (hi - lo);
}

double sample_one_interval(double mean, Interval interval, const SamplerAccuracy& acc, Rng& rng) {
  if (!(interval.lo <= interval.hi)) throw ValidationError("sample_one_interval: empty interval");
  if (interval.lo == interval.hi) return interval.lo;
  const double lo = interval.lo - mean;
  const double hi = interval.hi - mean;
  const double u = uniform_open01(rng);
  const double eta = acc.inversion_tolerance;
  double t;
  if (lo >= 0.0) t = invert_right_tail(lo, hi, u, eta);
  else if (hi <= 0.0) t = -invert_right_tail(-hi, -lo, u, eta);
  else t = invert_central(lo, hi, u, eta);
  return std::clamp(mean + t, interval.lo, interval.hi);
}

double sample_truncated(double mean, const TruncationSet& set, const SamplerAccuracy& acc, Rng& rng) {
  if (!set.is_interval_union()) {
    const auto& oracle = set.oracle();
    for (std::size_t i = 0; i < acc.max_rejection_draws; ++i) {
      const double z = oracle.envelope ? sample_one_interval(mean, *oracle.envelope, acc, rng)
                                       : mean + standard_normal(rng);
      if (oracle.contains(z)) return z;
    }
    throw NumericError("rejection sampling exceeded " + std::to_string(acc.max_rejection_draws) +
                       " draws; survival probability too small");
  }

  const auto& ivs = set.interval_union().intervals();
  if (ivs.size() == 1) return sample_one_interval(mean, ivs.front(), acc, rng);

  std::vector<double> logs;
  logs.reserve(ivs.size());
  for (const auto& iv : ivs) logs.push_back(log_std_normal_mass(iv.lo - mean, iv.hi - mean));
  const double log_total = log_sum_exp(logs);
  if (!std::isfinite(log_total)) throw NumericError("truncation set has zero mass under N(mean, 1)");

  const double prune = std::log(acc.tv_budget / (3.0 * static_cast<double>(ivs.size())));
  std::vector<double> weights(ivs.size(), 0.0);
  double kept = 0.0;
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    if (logs[i] - log_total > prune) {
      weights[i] = std::exp(logs[i] - log_total);
      kept += weights[i];
    }
  }
  double pick = uniform_open01(rng) * kept;
  std::size_t chosen = ivs.size();
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    if (weights[i] == 0.0) continue;
    chosen = i;
    if (pick < weights[i]) break;
    pick -= weights[i];
  }
  return sample_one_interval(mean, ivs[chosen], acc, rng);
}

}  // namespace trunreg
