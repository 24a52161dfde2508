#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace trunreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Seeded generator used everywhere randomness is consumed. Callers own it.
using Rng = std::mt19937_64;

/// Bad input: malformed sets, dimension mismatches, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric procedure could not deliver its guarantee (underflow,
/// non-convergence, exhausted attempt budgets, empty feasible domain).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trunreg
