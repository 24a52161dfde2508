#include "trunreg/likelihood.hpp"

#include "trunreg/logspace.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace trunreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kCancellationLimit = 1e-10;
// Integration window half-width in log-density: contributions below e^-70 of
// the peak are dropped.
constexpr double kWindowLogDrop = 140.0;
// Bisection depth bounds the work when roundoff keeps the error estimate above tol.
constexpr unsigned kMaxDepth = 12;
constexpr double kQuadratureTol = 1e-13;

struct IntervalMoments {
  double log_mass;
  double mean;
  double variance;
};

double xphi_ratio(double t, double log_mass) {
  if (!std::isfinite(t)) return 0.0;
  return t * std::exp(log_std_normal_pdf(t) - log_mass);
}

double phi_ratio(double t, double log_mass) {
  if (!std::isfinite(t)) return 0.0;
  return std::exp(log_std_normal_pdf(t) - log_mass);
}

// Standardized interval [lo, hi]: mean and variance by quadrature relative to
// the density peak inside the interval.
IntervalMoments quadrature_moments(double lo, double hi, double log_mass) {
  const double ref = std::clamp(0.0, lo, hi);
  const double reach = std::sqrt(ref * ref + kWindowLogDrop);
  const double a = std::max(lo, -reach);
  const double b = std::min(hi, reach);
  auto weight = [ref](double t) { return std::exp(-0.5 * (t * t - ref * ref)); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double z = GK::integrate(weight, a, b, kMaxDepth, kQuadratureTol);
  const double m = GK::integrate([&](double t) { return t * weight(t); }, a, b, kMaxDepth, kQuadratureTol) / z;
  const double v = GK::integrate([&](double t) { return (t - m) * (t - m) * weight(t); }, a, b, kMaxDepth, kQuadratureTol) / z;
  if (!(z > 0.0) || !std::isfinite(v)) throw NumericError("truncated moment quadrature did not converge");
  return {log_mass, m, v};
}

IntervalMoments interval_moments(double lo, double hi) {
  const double log_mass = log_std_normal_mass(lo, hi);
  if (!std::isfinite(log_mass)) return {log_mass, std::clamp(0.0, lo, hi), 0.0};
  const double pa = phi_ratio(lo, log_mass);
  const double pb = phi_ratio(hi, log_mass);
  const double xa = xphi_ratio(lo, log_mass);
  const double xb = xphi_ratio(hi, log_mass);
  const double m = pa - pb;
  const double second = 1.0 + xa - xb;
  const double v = second - m * m;
  // exp(log phi - log Z) carries relative error ~ eps * |log phi|.
  const double log_scale = 1.0 + std::max(std::isfinite(lo) ? 0.5 * lo * lo : 0.0,
                                          std::isfinite(hi) ? 0.5 * hi * hi : 0.0) + std::abs(log_mass);
  const double var_error = 4.0 * kEps * log_scale * (1.0 + std::abs(xa) + std::abs(xb) + m * m);
  const double mean_error = 4.0 * kEps * log_scale * (pa + pb);
  if (v > 0.0 && var_error <= kCancellationLimit * v && mean_error <= kCancellationLimit * std::sqrt(v))
    return {log_mass, m, v};
  return quadrature_moments(lo, hi, log_mass);
}

}  // namespace

TruncatedMoments truncated_moments(double mean, const TruncationSet& set) {
  const auto& ivs = set.interval_union().intervals();
  std::vector<IntervalMoments> parts;
  std::vector<double> logs;
  parts.reserve(ivs.size());
  for (const auto& iv : ivs) {
    parts.push_back(interval_moments(iv.lo - mean, iv.hi - mean));
    logs.push_back(parts.back().log_mass);
  }
  const double log_total = log_sum_exp(logs);
  if (!std::isfinite(log_total)) throw NumericError("truncation set has zero mass under N(mean, 1)");
  double m = 0.0;
  for (const auto& p : parts) m += std::exp(p.log_mass - log_total) * p.mean;
  double v = 0.0;
  for (const auto& p : parts) {
    const double d = p.mean - m;
    v += std::exp(p.log_mass - log_total) * (p.variance + d * d);
  }
  return {log_total, mean + m, v};
}

double nll_single(const Vector& w, const Sample& s, const TruncationSet& set) {
  if (w.size() != s.x.size()) throw ValidationError("nll_single: dimension mismatch");
  if (!membership(set, s.y)) throw ValidationError("nll_single: response lies outside the truncation set");
  const double mu = w.dot(s.x);
  // log integral_S exp(-z^2/2 + z mu) dz = log sqrt(2 pi) + mu^2/2 + log N(mu, 1; S)
  const double log_partition = 0.5 * std::log(2.0 * std::numbers::pi) + 0.5 * mu * mu + log_gaussian_mass({mu, 1.0}, set);
  return 0.5 * s.y * s.y - s.y * mu + log_partition;
}

double nll_mean(const Vector& w, const Dataset& data, const TruncationSet& set) {
  if (data.n() == 0) throw ValidationError("nll_mean: empty dataset");
  double acc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) acc += nll_single(w, data.sample(i), set);
  return acc / static_cast<double>(data.n());
}

Vector grad_fi(const Vector& w, const Sample& s_i, const Vector& x_j, double z_j) {
  if (w.size() != s_i.x.size() || w.size() != x_j.size()) throw ValidationError("grad_fi: dimension mismatch");
  return z_j * x_j - s_i.y * s_i.x;
}

Vector population_gradient(const Vector& w, const Dataset& data, const TruncationSet& set) {
  if (static_cast<std::size_t>(w.size()) != data.k()) throw ValidationError("population_gradient: dimension mismatch");
  if (data.n() == 0) throw ValidationError("population_gradient: empty dataset");
  Vector g = Vector::Zero(w.size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto row = data.covariates.row(static_cast<Eigen::Index>(i));
    const double mu = row.dot(w);
    const double m = truncated_moments(mu, set).mean;
    g += (m - data.responses[static_cast<Eigen::Index>(i)]) * row.transpose();
  }
  return g / static_cast<double>(data.n());
}

Matrix hessian_quadrature(const Vector& w, const Dataset& data, const TruncationSet& set) {
  if (static_cast<std::size_t>(w.size()) != data.k()) throw ValidationError("hessian_quadrature: dimension mismatch");
  if (data.n() == 0) throw ValidationError("hessian_quadrature: empty dataset");
  Matrix h = Matrix::Zero(w.size(), w.size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Vector x = data.covariates.row(static_cast<Eigen::Index>(i)).transpose();
    const double var = truncated_moments(x.dot(w), set).variance;
    h.noalias() += var * x * x.transpose();
  }
  return h / static_cast<double>(data.n());
}

}  // namespace trunreg
