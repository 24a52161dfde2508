#include "trunreg/projection.hpp"

#include "trunreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trunreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMemberSlack = 1e-12;
constexpr int kPowerSteps = 4;
constexpr std::size_t kMaxMomentDim = 32;

// Symmetric k x k matrices are stored packed over pairs (a <= b).
Eigen::Index packed_size(Eigen::Index k) { return k * (k + 1) / 2; }

// Packed u u^T with off-diagonal pairs doubled, so that for symmetric S,
// <S, u u^T> = packed(S) . packed_outer_weights(u).
Vector packed_outer_weights(const Vector& u) {
  const auto k = u.size();
  Vector out(packed_size(k));
  Eigen::Index p = 0;
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a; b < k; ++b) out[p++] = (a == b ? 1.0 : 2.0) * u[a] * u[b];
  return out;
}

Vector packed_outer(const Vector& u) {
  const auto k = u.size();
  Vector out(packed_size(k));
  Eigen::Index p = 0;
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a; b < k; ++b) out[p++] = u[a] * u[b];
  return out;
}

Matrix unpack(const Vector& packed, Eigen::Index k) {
  Matrix m(k, k);
  Eigen::Index p = 0;
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a; b < k; ++b) m(a, b) = m(b, a) = packed[p++];
  return m;
}

}  // namespace

double optimal_slack(double a) {
  if (!(a > 0.0 && a <= 1.0)) throw ValidationError("survival constant a must lie in (0, 1]");
  return 4.0 * std::log(2.0 / a) + 7.0;
}

DomainParams DomainParams::from_survival(double a, double bound) {
  DomainParams p{optimal_slack(a), bound, a};
  p.validate();
  return p;
}

void DomainParams::validate() const {
  if (!(r > 0.0)) throw ValidationError("domain slack r must be positive");
  if (!(bound > 0.0)) throw ValidationError("domain norm bound B must be positive");
  if (!(a > 0.0 && a <= 1.0)) throw ValidationError("survival constant a must lie in (0, 1]");
}

Matrix spectral_matrix(const Vector& u, const Dataset& data) {
  if (static_cast<std::size_t>(u.size()) != data.k()) throw ValidationError("spectral_matrix: dimension mismatch");
  const Vector residual = data.responses - data.covariates * u;
  return data.covariates.transpose() * residual.array().square().matrix().asDiagonal() * data.covariates;
}

FeasibleDomain::FeasibleDomain(const Dataset& data, DomainParams params) : params_(params) {
  params_.validate();
  n_ = data.n();
  k_ = data.k();
  if (spectral_vacuous()) return;
  x_ = data.covariates;
  y_ = data.responses;
  const Matrix second_moment = (x_.transpose() * x_) / static_cast<double>(n_);
  whitening_ = inverse_sqrt_psd(second_moment);
  whitened_x_ = x_ * whitening_;  // rows: (W x_i)^T, W symmetric

  const auto k = static_cast<Eigen::Index>(k_);
  use_moments_ = k_ <= kMaxMomentDim && k_ * k_ < n_;
  if (!use_moments_) return;
  const auto n = static_cast<Eigen::Index>(n_);
  Matrix phi(n, packed_size(k));
  Matrix psi(n, packed_size(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    phi.row(i) = packed_outer(whitened_x_.row(i).transpose()).transpose();
    psi.row(i) = packed_outer(x_.row(i).transpose()).transpose();
  }
  m0_ = phi.transpose() * y_.array().square().matrix();
  m1_ = phi.transpose() * (y_.asDiagonal() * x_);
  m2_ = phi.transpose() * psi;
}

bool FeasibleDomain::spectral_vacuous() const { return n_ == 0 || !std::isfinite(params_.r); }

Matrix FeasibleDomain::whitened_matrix_impl(const Vector& u) const {
  const auto k = static_cast<Eigen::Index>(k_);
  if (use_moments_) {
    return unpack(m0_ - 2.0 * (m1_ * u) + m2_ * packed_outer_weights(u), k);
  }
  const Vector residual = y_ - x_ * u;
  return whitened_x_.transpose() * residual.array().square().matrix().asDiagonal() * whitened_x_;
}

Matrix FeasibleDomain::whitened_spectral_matrix(const Vector& u) const {
  if (static_cast<std::size_t>(u.size()) != k_) throw ValidationError("whitened_spectral_matrix: dimension mismatch");
  if (spectral_vacuous()) return Matrix::Zero(u.size(), u.size());
  return whitened_matrix_impl(u);
}

double FeasibleDomain::spectral_ratio(const Vector& u) const {
  if (spectral_vacuous()) return 0.0;
  return top_eigenpair(whitened_spectral_matrix(u)).value / static_cast<double>(n_);
}

// -2 sum_i (y_i - u^T x_i) (v^T W x_i)^2 x_i: gradient at u of the convex
// quadratic whose sublevel set {<= r n} contains the domain.
Vector FeasibleDomain::cut_gradient(const Vector& u, const Vector& top) const {
  const auto k = static_cast<Eigen::Index>(k_);
  if (use_moments_) {
    const Vector s = packed_outer_weights(top);
    const Matrix weighted_gram = unpack(m2_.transpose() * s, k);
    return -2.0 * (m1_.transpose() * s - weighted_gram * u);
  }
  const Vector residual = y_ - x_ * u;
  const Vector proj = whitened_x_ * top;
  return -2.0 * (x_.transpose() * (residual.array() * proj.array().square()).matrix());
}

SeparationResult FeasibleDomain::separate(const Vector& u) const {
  if (static_cast<std::size_t>(u.size()) != k_) throw ValidationError("separate: dimension mismatch");
  const double norm = u.norm();
  if (norm > params_.bound * (1.0 + kMemberSlack)) return Hyperplane{u / norm, params_.bound};
  if (spectral_vacuous()) return Member{};

  const double n = static_cast<double>(n_);
  const auto top = top_eigenpair(whitened_matrix_impl(u));
  const double limit = params_.r * n;
  if (top.value <= limit + kMemberSlack * n) return Member{};

  const Vector d = cut_gradient(u, top.vector);
  const double dn = d.norm();
  if (!(dn > 0.0) || !std::isfinite(dn))
    throw NumericError("spectral constraint has a stationary violation; the domain is empty");
  // Linearization of the violated quadratic at u gives a deep cut.
  return Hyperplane{d / dn, (d.dot(u) - (top.value - limit)) / dn};
}

bool FeasibleDomain::spectral_member(const Matrix& m) const {
  const double n = static_cast<double>(n_);
  const auto k = static_cast<Eigen::Index>(k_);
  const Eigen::LLT<Matrix> chol((params_.r * n + kMemberSlack * n) * Matrix::Identity(k, k) - m);
  return chol.info() == Eigen::Success;
}

bool FeasibleDomain::contains(const Vector& u) const {
  if (static_cast<std::size_t>(u.size()) != k_) throw ValidationError("contains: dimension mismatch");
  if (u.norm() > params_.bound * (1.0 + kMemberSlack)) return false;
  return spectral_vacuous() || spectral_member(whitened_matrix_impl(u));
}

SeparationResult FeasibleDomain::separate(const Vector& u, Vector& direction) const {
  if (static_cast<std::size_t>(u.size()) != k_) throw ValidationError("separate: dimension mismatch");
  const double norm = u.norm();
  if (norm > params_.bound * (1.0 + kMemberSlack)) return Hyperplane{u / norm, params_.bound};
  if (spectral_vacuous()) return Member{};

  const double n = static_cast<double>(n_);
  const double limit = params_.r * n;
  const Matrix m = whitened_matrix_impl(u);
  if (spectral_member(m)) return Member{};
  const auto k = static_cast<Eigen::Index>(k_);

  // m is PSD, so plain power steps climb toward the top eigenvector.
  Vector v = direction.size() == u.size() && direction.norm() > 0.0 ? direction.normalized()
                                                                    : Vector(Vector::Ones(k).normalized());
  double value = v.dot(m * v);
  for (int it = 0; it < kPowerSteps; ++it) {
    const Vector next = m * v;
    const double len = next.norm();
    if (!(len > 0.0)) break;
    v = next / len;
    value = v.dot(m * v);
  }
  if (!(value > limit)) {
    const auto top = top_eigenpair(m);
    v = top.vector;
    value = top.value;
  }
  direction = v;

  const Vector d = cut_gradient(u, v);
  const double dn = d.norm();
  if (!(dn > 0.0) || !std::isfinite(dn))
    throw NumericError("spectral constraint has a stationary violation; the domain is empty");
  return Hyperplane{d / dn, (d.dot(u) - (value - limit)) / dn};
}

double FeasibleDomain::feasibility_residual(const Vector& u) const {
  return std::max({spectral_ratio(u) - params_.r, u.norm() - params_.bound, 0.0});
}

SeparationResult find_separation(const Vector& u, const DomainParams& params, const Dataset& data) {
  return FeasibleDomain(data, params).separate(u);
}

std::optional<Vector> ellipsoid_feasible_point(const FeasibleDomain& domain, const Vector& center, double radius,
                                               double tol_inner, ProjectionStats* stats) {
  ProjectionStats local;
  ProjectionStats& st = stats ? *stats : local;
  ++st.ellipsoid_runs;
  const auto k = static_cast<Eigen::Index>(domain.dimension());
  if (!(radius > tol_inner)) {
    ++st.oracle_calls;
    return domain.contains(center) ? std::optional<Vector>(center) : std::nullopt;
  }

  // Cut from the current query: the radius ball first, then the domain oracle.
  Vector direction;
  auto cut_at = [&](const Vector& c) -> std::optional<Hyperplane> {
    const Vector diff = c - center;
    const double dist = diff.norm();
    if (dist > radius) {
      const Vector nrm = diff / dist;
      return Hyperplane{nrm, nrm.dot(center) + radius};
    }
    ++st.oracle_calls;
    auto sep = domain.separate(c, direction);
    if (is_member(sep)) return std::nullopt;
    return std::get<Hyperplane>(std::move(sep));
  };

  if (k == 1) {
    double lo = center[0] - radius;
    double hi = center[0] + radius;
    const int max_iter = static_cast<int>(std::ceil(std::log2(2.0 * radius / tol_inner))) + 2;
    for (int it = 0; it < max_iter && hi - lo > tol_inner; ++it) {
      Vector c(1);
      c[0] = 0.5 * (lo + hi);
      auto cut = cut_at(c);
      if (!cut) return c;
      const double bound = cut->offset / cut->normal[0];
      if (cut->normal[0] > 0.0) hi = std::min(hi, bound);
      else lo = std::max(lo, bound);
      if (lo > hi) return std::nullopt;
    }
    return std::nullopt;
  }

  const double kd = static_cast<double>(k);
  const auto max_iter = static_cast<long>(std::ceil(2.0 * kd * (kd + 1.0) * std::log(radius / tol_inner)));
  Vector c = center;
  Matrix shape = Matrix::Identity(k, k) * (radius * radius);
  for (long it = 0; it < std::max(1L, max_iter); ++it) {
    auto cut = cut_at(c);
    if (!cut) return c;
    const Vector pd = shape * cut->normal;
    const double s = std::sqrt(cut->normal.dot(pd));
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("ellipsoid volume underflow");
    const double alpha = std::max(0.0, (cut->normal.dot(c) - cut->offset) / s);
    if (alpha >= 1.0) return std::nullopt;
    const Vector b = pd / s;
    c -= ((1.0 + kd * alpha) / (kd + 1.0)) * b;
    const double scale = kd * kd * (1.0 - alpha * alpha) / (kd * kd - 1.0);
    const double shrink = 2.0 * (1.0 + kd * alpha) / ((kd + 1.0) * (1.0 + alpha));
    shape = scale * (shape - shrink * (b * b.transpose()));
    shape = 0.5 * (shape + shape.transpose()).eval();
  }
  return std::nullopt;
}

Vector project(const Vector& w, const FeasibleDomain& domain, double tol, const Vector* feasible_hint,
               ProjectionStats* stats) {
  if (static_cast<std::size_t>(w.size()) != domain.dimension()) throw ValidationError("project: dimension mismatch");
  if (!(tol > 0.0)) throw ValidationError("project: tol must be positive");
  ProjectionStats local;
  ProjectionStats& st = stats ? *stats : local;

  ++st.oracle_calls;
  Vector direction;
  const auto first = domain.separate(w, direction);
  if (is_member(first)) return w;

  // Projection onto the ball is exact whenever it lands inside the domain.
  const double bound = domain.params().bound;
  const double norm = w.norm();
  if (norm > bound) {
    const Vector radial = w * (bound / norm);
    ++st.oracle_calls;
    if (domain.contains(radial)) return radial;
  }

  const auto& cut = std::get<Hyperplane>(first);
  double tau_lo = std::max(0.0, cut.normal.dot(w) - cut.offset);
  std::optional<Vector> best;
  if (feasible_hint) {
    ++st.oracle_calls;
    if (domain.contains(*feasible_hint)) best = *feasible_hint;
  }
  const double tol_inner = tol / 10.0;
  if (!best) {
    best = ellipsoid_feasible_point(domain, w, norm + bound, tol_inner, &st);
    if (!best) throw NumericError("feasible domain is empty (ellipsoid found no point within ||w|| + B)");
  }
  double tau_hi = (*best - w).norm();
  while (tau_hi - tau_lo > tol) {
    ++st.bisection_steps;
    const double mid = 0.5 * (tau_lo + tau_hi);
    auto z = ellipsoid_feasible_point(domain, w, mid, tol_inner, &st);
    if (z) {
      // Points returned by the ellipsoid lie within mid of w.
      tau_hi = (*z - w).norm();
      best = std::move(z);
    } else {
      tau_lo = mid;
    }
  }
  return *best;
}

Vector project(const Vector& w, const DomainParams& params, const Dataset& data, double tol) {
  return project(w, FeasibleDomain(data, params), tol);
}

}  // namespace trunreg
