#include "trunreg/sgd.hpp"

#include "trunreg/likelihood.hpp"
#include "trunreg/linalg.hpp"
#include "trunreg/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace trunreg {

namespace {

constexpr double kDivergenceFactor = 1e6;
constexpr double kSingularFloor = 1e-12;

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform_open01(rng) * static_cast<double>(n)));
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[uniform_index(rng, i)]);
  return p;
}

Matrix second_moment(const Dataset& data) {
  return (data.covariates.transpose() * data.covariates) / static_cast<double>(data.n());
}

}  // namespace

void SgdConfig::validate() const {
  if (lambda && !(*lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (passes < 1) throw ValidationError("passes must be >= 1");
  if (!(a > 0.0 && a <= 1.0)) throw ValidationError("a must lie in (0, 1]");
  if (!(b_cov > 0.0)) throw ValidationError("B_cov must be positive");
  if (!(c_norm > 0.0)) throw ValidationError("C_norm must be positive");
  if (!(projection_tol > 0.0)) throw ValidationError("projection_tol must be positive");
  sampler.validate();
}

SgdConfig parse_sgd_config(const nlohmann::json& j, SgdConfig cfg) {
  if (!j.is_object()) throw ValidationError("SGD config must be a JSON object");
  try {
    if (j.contains("lambda") && !j.at("lambda").is_null()) cfg.lambda = j.at("lambda").get<double>();
    if (j.contains("passes")) cfg.passes = j.at("passes").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("a")) cfg.a = j.at("a").get<double>();
    if (j.contains("B_cov")) cfg.b_cov = j.at("B_cov").get<double>();
    if (j.contains("C_norm")) cfg.c_norm = j.at("C_norm").get<double>();
    if (j.contains("tv_budget")) cfg.sampler.tv_budget = j.at("tv_budget").get<double>();
    if (j.contains("projection_tol")) cfg.projection_tol = j.at("projection_tol").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("SGD config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json sgd_config_to_json(const SgdConfig& cfg) {
  nlohmann::json j{{"passes", cfg.passes},  {"seed", cfg.seed},
                   {"a", cfg.a},            {"B_cov", cfg.b_cov},
                   {"C_norm", cfg.c_norm},  {"tv_budget", cfg.sampler.tv_budget},
                   {"projection_tol", cfg.projection_tol}};
  j["lambda"] = cfg.lambda ? nlohmann::json(*cfg.lambda) : nlohmann::json(nullptr);
  return j;
}

NormalizedData normalize(const Dataset& data, const SgdConfig& cfg) {
  if (!(cfg.b_cov > 0.0)) throw ValidationError("B_cov must be positive");
  if (data.n() > 0) {
    const double worst = data.covariates.cwiseAbs().maxCoeff();
    if (worst > cfg.b_cov)
      throw ValidationError("covariate magnitude " + std::to_string(worst) + " exceeds B_cov = " +
                            std::to_string(cfg.b_cov));
  }
  const double scale = 1.0 / (cfg.b_cov * std::sqrt(static_cast<double>(data.k())));
  return {Dataset(data.covariates * scale, data.responses, data.scale * scale), scale};
}

double default_lambda(const Dataset& data, const Vector& w, const TruncationSet& set) {
  double alpha = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i)
    alpha += survival_probability(w, data.covariates.row(static_cast<Eigen::Index>(i)).transpose(), set);
  alpha /= static_cast<double>(data.n());
  const double b2 = min_eigenvalue(second_moment(data));
  if (!(b2 > kSingularFloor)) throw ValidationError("covariate second-moment matrix is singular");
  // Var(z) >= alpha^2 / 12 and X >= b^2 I bound the Hessian below by their product.
  return alpha * alpha * b2 / 12.0;
}

EstimateResult estimate(const Dataset& data, const TruncationSet& set, const SgdConfig& cfg) {
  cfg.validate();
  if (data.n() == 0) throw ValidationError("estimate: dataset is empty");
  for (std::size_t i = 0; i < data.n(); ++i)
    if (!membership(set, data.responses[static_cast<Eigen::Index>(i)]))
      throw ValidationError("estimate: response " + std::to_string(i) + " lies outside the truncation set");

  const auto normalized = normalize(data, cfg);
  const Dataset& work = normalized.data;
  const auto k = static_cast<Eigen::Index>(work.k());
  const double bound = cfg.b_cov * cfg.c_norm * std::sqrt(static_cast<double>(k));
  const FeasibleDomain domain(work, DomainParams::from_survival(cfg.a, bound));

  EstimateResult result;
  Rng rng(cfg.seed);
  Vector w = project(Vector::Zero(k), domain, cfg.projection_tol, nullptr, &result.projection);
  result.lambda = cfg.lambda ? *cfg.lambda : default_lambda(work, w, set);

  Vector sum = Vector::Zero(k);
  long step = 0;
  for (int pass = 0; pass < cfg.passes; ++pass) {
    for (std::size_t i : permutation(work.n(), rng)) {
      ++step;
      const double eta = 1.0 / (result.lambda * static_cast<double>(step));
      const auto xi = work.covariates.row(static_cast<Eigen::Index>(i));
      const auto xj = work.covariates.row(static_cast<Eigen::Index>(uniform_index(rng, work.n())));
      const double z = sample_truncated(xj.dot(w), set, cfg.sampler, rng);
      const Vector v = z * xj.transpose() - work.responses[static_cast<Eigen::Index>(i)] * xi.transpose();
      const double v_norm = v.norm();
      if (!std::isfinite(v_norm))
        throw NumericError("estimate: non-finite gradient estimate at step " + std::to_string(step));
      const bool rejected = v_norm > kDivergenceFactor * bound;
      if (rejected) {
        ++result.rejected_steps;
      } else {
        Vector next = project(w - eta * v, domain, cfg.projection_tol, &w, &result.projection);
        if (!next.allFinite()) throw NumericError("estimate: non-finite iterate at step " + std::to_string(step));
        w = std::move(next);
      }
      sum += w;
      if (cfg.record_trace) result.trace.push_back({step, v_norm, domain.feasibility_residual(w), rejected});
    }
  }
  result.steps = step;
  result.w_hat = (sum / static_cast<double>(step)) * normalized.scale;
  result.rng_state = rng();
  return result;
}

AssumptionReport check_assumptions(const Dataset& data, const Vector& w_ref, const TruncationSet& set,
                                   double a_target, double b2_target) {
  if (data.n() == 0) throw ValidationError("check_assumptions: dataset is empty");
  if (static_cast<std::size_t>(w_ref.size()) != data.k()) throw ValidationError("check_assumptions: dimension mismatch");
  AssumptionReport report;
  const Matrix x = second_moment(data);
  report.min_eigenvalue = min_eigenvalue(x);
  const double n = static_cast<double>(data.n());
  const double log_k = std::log(static_cast<double>(data.k()));
  report.leverage_cap = log_k > 0.0 ? n / log_k : std::numeric_limits<double>::infinity();
  if (report.min_eigenvalue <= kSingularFloor) {
    report.max_leverage = std::numeric_limits<double>::infinity();
    return report;
  }
  const Eigen::LLT<Matrix> chol(x);
  Matrix weighted = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Vector xi = data.covariates.row(static_cast<Eigen::Index>(i)).transpose();
    report.max_leverage = std::max(report.max_leverage, xi.dot(chol.solve(xi)));
    const double log_inv_alpha = -log_gaussian_mass({w_ref.dot(xi), 1.0}, set);
    weighted.noalias() += log_inv_alpha * xi * xi.transpose();
  }
  weighted /= n;
  report.thickness_ok = report.min_eigenvalue >= b2_target && report.max_leverage <= report.leverage_cap;
  const Matrix w_half = inverse_sqrt_psd(x, kSingularFloor);
  const double top = top_eigenpair(w_half * weighted * w_half).value;
  report.implied_a = std::exp(-std::max(0.0, top));
  report.survival_ok = *report.implied_a >= a_target;
  return report;
}

}  // namespace trunreg
