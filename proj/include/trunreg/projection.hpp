#pragma once

#include "trunreg/dataset.hpp"
#include "trunreg/types.hpp"

#include <optional>
#include <variant>

namespace trunreg {

/// r* = 4 log(2/a) + 7.
double optimal_slack(double a);

/// Parameters of D_{r,B} = { w : sum_i (y_i - w^T x_i)^2 x_i x_i^T <= r sum_i x_i x_i^T, ||w|| <= B }.
struct DomainParams {
  double r;
  double bound;
  double a = 1.0;

  /// r = r*(a).
  static DomainParams from_survival(double a, double bound);
  void validate() const;
};

struct Member {};

/// Every point of the domain satisfies normal^T z <= offset; the query point
/// satisfies normal^T u >= offset. Normals are unit length.
struct Hyperplane {
  Vector normal;
  double offset;
};

using SeparationResult = std::variant<Member, Hyperplane>;

inline bool is_member(const SeparationResult& s) { return std::holds_alternative<Member>(s); }

/// A(u) = sum_i (y_i - u^T x_i)^2 x_i x_i^T in the dataset's own coordinates.
Matrix spectral_matrix(const Vector& u, const Dataset& data);

/// Membership, separation and residual queries for D_{r,B} over a fixed
/// dataset. The spectral constraint is evaluated in the basis where
/// sum_i x_i x_i^T = n I, i.e. as lambda_max(X^{-1/2} A(u) X^{-1/2}) <= r n with
/// X = (1/n) sum_i x_i x_i^T. Candidate points stay in the original
/// coordinates, so projections are Euclidean there.
class FeasibleDomain {
 public:
  /// Throws ValidationError when X is singular (min eigenvalue < 1e-12).
  /// An empty dataset or r = inf leaves only the ball constraint.
  FeasibleDomain(const Dataset& data, DomainParams params);

  const DomainParams& params() const { return params_; }
  std::size_t dimension() const { return k_; }
  std::size_t sample_count() const { return n_; }

  /// X^{-1/2} A(u) X^{-1/2}.
  Matrix whitened_spectral_matrix(const Vector& u) const;

  /// lambda_max of the whitened spectral matrix divided by n (0 without data).
  double spectral_ratio(const Vector& u) const;

  SeparationResult separate(const Vector& u) const;
  /// Variant for runs of nearby queries. Membership is decided by Cholesky and
  /// a violation is cut along a few power steps started from `direction`,
  /// which is updated in place. Any unit vector exposing the violation yields a
  /// valid deep cut; the exact top eigenvector is used only as a fallback.
  SeparationResult separate(const Vector& u, Vector& direction) const;

  /// max(spectral_ratio - r, ||u|| - B, 0).
  double feasibility_residual(const Vector& u) const;

  bool contains(const Vector& u) const;

 private:
  Matrix whitened_matrix_impl(const Vector& u) const;
  Vector cut_gradient(const Vector& u, const Vector& top) const;
  bool spectral_vacuous() const;
  bool spectral_member(const Matrix& m) const;

  DomainParams params_;
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  RowMatrix x_;
  RowMatrix whitened_x_;
  Vector y_;
  Matrix whitening_;
  // Packed moment tensors for O(k^4) queries independent of n:
  // packed(A(u)) = m0 - 2 m1 u + m2 packed_weights(u u^T).
  bool use_moments_ = false;
  Vector m0_;
  Matrix m1_;
  Matrix m2_;
};

SeparationResult find_separation(const Vector& u, const DomainParams& params, const Dataset& data);

struct ProjectionStats {
  long oracle_calls = 0;
  long ellipsoid_runs = 0;
  long bisection_steps = 0;
};

/// Ellipsoid method started from the ball ||z - center|| <= radius. Returns a
/// point of the domain within that ball, or nullopt ("Empty") once the volume
/// bound 2k(k+1) ln(radius / tol_inner) iterations is reached or a cut
/// excludes the whole ellipsoid.
std::optional<Vector> ellipsoid_feasible_point(const FeasibleDomain& domain, const Vector& center, double radius,
                                               double tol_inner, ProjectionStats* stats = nullptr);

/// Approximate Euclidean projection onto the domain: bisection on tau with an
/// ellipsoid feasibility run per step. `feasible_hint`, if it is a member,
/// seeds the upper end of the tau bracket. Throws NumericError if the domain is
/// certified empty.
Vector project(const Vector& w, const FeasibleDomain& domain, double tol = 1e-6,
               const Vector* feasible_hint = nullptr, ProjectionStats* stats = nullptr);

Vector project(const Vector& w, const DomainParams& params, const Dataset& data, double tol = 1e-6);

}  // namespace trunreg
