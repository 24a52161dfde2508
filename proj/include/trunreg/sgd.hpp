#pragma once

#include "trunreg/dataset.hpp"
#include "trunreg/projection.hpp"
#include "trunreg/sampler.hpp"
#include "trunreg/sets.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace trunreg {

struct SgdConfig {
  /// Step sizes are 1/(lambda * i). Unset: estimated from the data, see
  /// default_lambda().
  std::optional<double> lambda;
  int passes = 1;
  std::uint64_t seed = 0;
  double a = 0.05;    ///< survival constant, sets r* of the projection domain
  double b_cov = 1.0;   ///< bound on ||x||_inf
  double c_norm = 1.0;  ///< bound on ||w*||_2
  SamplerAccuracy sampler;
  double projection_tol = 1e-6;
  bool record_trace = false;

  void validate() const;
};

/// Keys: lambda, passes, seed, a, B_cov, C_norm, tv_budget, projection_tol.
/// Missing keys keep their defaults.
SgdConfig parse_sgd_config(const nlohmann::json& j, SgdConfig base = {});
nlohmann::json sgd_config_to_json(const SgdConfig& cfg);

struct TraceEntry {
  long step;
  double step_norm;  ///< ||v||
  double residual;   ///< feasibility residual of the iterate after projection
  bool rejected;
};

struct EstimateResult {
  Vector w_hat;  ///< averaged iterate in the caller's coordinates
  std::vector<TraceEntry> trace;
  long steps = 0;
  long rejected_steps = 0;
  double lambda = 0.0;
  std::uint64_t rng_state = 0;  ///< next raw draw of the generator after the run
  ProjectionStats projection;
};

struct NormalizedData {
  Dataset data;
  double scale;
};

/// Divides covariates by B_cov sqrt(k) so that ||x||_2 <= 1. Throws
/// ValidationError if some |x_ic| exceeds B_cov.
NormalizedData normalize(const Dataset& data, const SgdConfig& cfg);

/// alpha^2 b^2 / 12 with alpha the mean survival probability at w and b^2
/// the smallest eigenvalue of the covariate second-moment matrix.
double default_lambda(const Dataset& data, const Vector& w, const TruncationSet& set);

/// Projected SGD without replacement on the truncated negative log-likelihood.
EstimateResult estimate(const Dataset& data, const TruncationSet& set, const SgdConfig& cfg);

struct AssumptionReport {
  double min_eigenvalue = 0.0;  ///< lambda_min(X), the thickness witness b^2
  double max_leverage = 0.0;    ///< max_i x_i^T X^{-1} x_i
  double leverage_cap = 0.0;    ///< n / log k (inf for k = 1)
  bool thickness_ok = false;
  std::optional<double> implied_a;  ///< exp(-lambda_max(X^{-1/2} M X^{-1/2})); unset when X is singular
  bool survival_ok = false;
};

/// Thickness and constant-survival-probability checks at w_ref. `a_target` and
/// `b2_target` are the constants the caller wants certified.
AssumptionReport check_assumptions(const Dataset& data, const Vector& w_ref, const TruncationSet& set,
                                   double a_target = 0.0, double b2_target = 0.0);

}  // namespace trunreg
