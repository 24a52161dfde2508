#include "trunreg/linalg.hpp"

#include <cmath>

namespace trunreg {

namespace {
constexpr Eigen::Index kDenseLimit = 64;
}

Eigenpair top_eigenpair(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ValidationError("top_eigenpair: need a nonempty square matrix");
  if (a.rows() > kDenseLimit) {
    try {
      return power_iteration(a);
    } catch (const NumericError&) {
      // Slow convergence (clustered top eigenvalues); fall through to dense.
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolve failed");
  const auto last = a.rows() - 1;
  return {solver.eigenvalues()[last], solver.eigenvectors().col(last)};
}

Eigenpair power_iteration(const Matrix& a, double tol, int max_iter) {
  const auto k = a.rows();
  // Gershgorin bound for the shift that makes a + shift I positive semidefinite.
  double shift = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double radius = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    shift = std::max(shift, radius - a(i, i));
  }
  Vector v = Vector::Ones(k) / std::sqrt(static_cast<double>(k));
  for (int it = 0; it < max_iter; ++it) {
    const Vector av = a * v;
    const double rayleigh = v.dot(av);
    // The residual bounds both the eigenvalue and the eigenvector error.
    if ((av - rayleigh * v).norm() <= tol * std::max(1.0, std::abs(rayleigh))) return {rayleigh, v};
    Vector next = av + shift * v;
    const double norm = next.norm();
    if (norm == 0.0) return {0.0, v};
    v = next / norm;
  }
  throw NumericError("power iteration did not converge");
}

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolve failed");
  return solver.eigenvalues()[0];
}

Matrix inverse_sqrt_psd(const Matrix& a, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolve failed");
  if (solver.eigenvalues()[0] < floor)
    throw ValidationError("matrix is singular to working precision (min eigenvalue " +
                          std::to_string(solver.eigenvalues()[0]) + ")");
  return solver.eigenvectors() * solver.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace trunreg
