#pragma once

#include "trunreg/sets.hpp"
#include "trunreg/types.hpp"

#include <functional>
#include <limits>

namespace trunreg {

struct SamplerAccuracy {
  double tv_budget = 1e-10;          ///< zeta: total-variation budget.
  double inversion_tolerance = 1e-12;  ///< eta: absolute accuracy of F^{-1}(U).
  std::size_t max_rejection_draws = 1'000'000;

  void validate() const;
};

/// Bounds ell <= f'(x) <= L on the function being inverted.
struct DerivativeBounds {
  double lower;
  double upper = std::numeric_limits<double>::infinity();
};

/// Domain of the inverted function. Infinite ends are bracketed by doubling.
struct Bracket {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Evaluation oracle for f^{-1}: returns x with |x - f^{-1}(y)| <= eta.
///
/// Brackets the root by doubling outward from `start` (or uses the finite ends
/// of `domain`), then bisects, calling f with target accuracy ell * eta. A
/// finite domain end is accepted as a bracket side without checking f there,
/// so f may be infinite at the boundary. Throws NumericError when no bracket is
/// found within the doubling cap.
double invert_monotone(const std::function<double(double)>& f, double y, DerivativeBounds bounds,
                       double eta, Bracket domain = {}, double start = 0.0);

/// Draws from N(mean, 1) restricted to [lo, hi] by inverting the truncated CDF
/// in log space. Works for interval masses down to ~1e-300.
double sample_one_interval(double mean, Interval interval, const SamplerAccuracy& acc, Rng& rng);

/// Draws from N(mean, 1, S). Interval unions use inverse transform after
/// choosing an interval proportionally to its mass (intervals holding at most
/// zeta/(3r) of the total are dropped). Oracle-only sets use rejection and
/// throw NumericError after max_rejection_draws failures.
double sample_truncated(double mean, const TruncationSet& set, const SamplerAccuracy& acc, Rng& rng);

}  // namespace trunreg
