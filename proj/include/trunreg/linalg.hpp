#pragma once

#include "trunreg/types.hpp"

namespace trunreg {

struct Eigenpair {
  double value;
  Vector vector;  ///< unit norm
};

/// Largest eigenvalue of a symmetric matrix and its eigenvector. Dense
/// self-adjoint solve up to dimension 64, shifted power iteration above.
Eigenpair top_eigenpair(const Matrix& a);

/// Power iteration on (a + shift I) with shift making it PSD. Throws
/// NumericError if the residual ||a v - rho v|| is not below `tol` (relative to rho)
/// within `max_iter` iterations.
Eigenpair power_iteration(const Matrix& a, double tol = 1e-10, int max_iter = 10'000);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& a);

/// Symmetric inverse square root; throws ValidationError when the smallest
/// eigenvalue is below `floor`.
Matrix inverse_sqrt_psd(const Matrix& a, double floor = 1e-12);

}  // namespace trunreg
