#pragma once

#include "trunreg/dataset.hpp"
#include "trunreg/sets.hpp"
#include "trunreg/types.hpp"

namespace trunreg {

/// Moments of z ~ N(mean, 1, S).
struct TruncatedMoments {
  double log_mass;
  double mean;
  double variance;
};

/// Per-interval closed forms (log-space density ratios) combined as a mixture.
/// An interval whose closed form loses more than ~1e-10 relative accuracy to
/// cancellation is integrated by adaptive Gauss-Kronrod instead.
TruncatedMoments truncated_moments(double mean, const TruncationSet& set);

/// Negative log-likelihood of one surviving sample:
/// y^2/2 - y w^T x + log integral_S exp(-z^2/2 + z w^T x) dz.
/// Throws ValidationError if y is not in S.
double nll_single(const Vector& w, const Sample& s, const TruncationSet& set);

/// Mean of nll_single over the dataset.
double nll_mean(const Vector& w, const Dataset& data, const TruncationSet& set);

/// Stochastic descent direction for f_i: v = z_j x_j - y_i x_i, where z_j was
/// drawn from N(w^T x_j, 1, S). Its expectation over uniform j and z_j is the
/// gradient of the empirical negative log-likelihood term for sample i.
Vector grad_fi(const Vector& w, const Sample& s_i, const Vector& x_j, double z_j);

/// (1/n) sum_i (m(w^T x_i) - y_i) x_i with m the truncated mean.
Vector population_gradient(const Vector& w, const Dataset& data, const TruncationSet& set);

/// (1/n) sum_i Var_{z ~ N(w^T x_i, 1, S)}[z] x_i x_i^T; the Hessian of the
/// negative log-likelihood, hence PSD.
Matrix hessian_quadrature(const Vector& w, const Dataset& data, const TruncationSet& set);

}  // namespace trunreg
