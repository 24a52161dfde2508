#pragma once

#include "trunreg/dataset.hpp"
#include "trunreg/sets.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace trunreg {

/// x ~ N(0, I_k), each coordinate clamped to [-clip, clip] when clip is set.
struct GaussianCovariates {
  std::size_t k;
  std::optional<double> clip;
};

/// Sample i uses list[i % size]; retries keep the same covariate.
struct FixedCovariates {
  std::vector<Vector> list;
};

struct CustomCovariates {
  std::size_t k;
  std::function<Vector(Rng&)> draw;
};

using CovariateSource = std::variant<GaussianCovariates, FixedCovariates, CustomCovariates>;

struct GeneratorSpec {
  Vector w_star;
  CovariateSource covariates;
  TruncationSet set = TruncationSet::real_line();
  /// Generator-side filter on x; the estimator never sees it.
  std::function<bool(const Vector&)> covariate_filter;
  std::size_t max_attempts_per_sample = 1'000'000;

  void validate() const;
};

struct GenerationStats {
  std::size_t attempts = 0;
  std::size_t accepted = 0;
};

/// y = w*^T x + eps, eps ~ N(0, 1); a draw is kept iff y is in S and x passes
/// the filter. Sample i uses its own generator seeded from `seed` and i, so the
/// result does not depend on evaluation order. Throws NumericError when a
/// sample exhausts its attempt budget.
Dataset generate(const GeneratorSpec& spec, std::size_t n, std::uint64_t seed, GenerationStats* stats = nullptr);

/// Least squares via column-pivoted Householder QR. Throws NumericError when
/// the design is rank deficient.
Vector ols(const Dataset& data);

/// Realizable noisy-ReLU outputs y = max(0, w*^T x + eps) for the given inputs.
std::vector<Sample> relu_forward(const Vector& w_star, const std::vector<Vector>& inputs, Rng& rng);

/// Drops censored outputs (y == 0) and returns the rest with S = (0, inf).
/// Throws ValidationError on negative outputs or when nothing survives.
std::pair<Dataset, TruncationSet> relu_reduce(const std::vector<Sample>& pairs);

/// {"w_star":[...]} or {"k":10,"w_star_fill":1}; "covariates":{"type":"gaussian","clip":6};
/// "set":{...}; optional "filter":{"type":"wstar_dot_below","threshold":2};
/// optional "max_attempts".
GeneratorSpec parse_generator(const nlohmann::json& j);

}  // namespace trunreg
