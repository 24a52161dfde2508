#include "trunreg/linalg.hpp"
#include "trunreg/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace trunreg;

namespace {
// Q diag(values) Q^T with Q a product of random Householder reflections.
Matrix with_spectrum(const std::vector<double>& values, Rng& rng) {
  const int k = static_cast<int>(values.size());
  Matrix q = Matrix::Identity(k, k);
  for (int rep = 0; rep < 3; ++rep) {
    Vector h(k);
    for (int c = 0; c < k; ++c) h[c] = standard_normal(rng);
    h.normalize();
    q = (Matrix::Identity(k, k) - 2.0 * h * h.transpose()) * q;
  }
  Matrix d = Matrix::Zero(k, k);
  for (int c = 0; c < k; ++c) d(c, c) = values[c];
  return q * d * q.transpose();
}
}  // namespace

TEST_CASE("top eigenpair of a known spectrum") {
  Rng rng(1);
  for (int k : {1, 2, 5, 20, 70}) {
    std::vector<double> vals(k);
    for (int c = 0; c < k; ++c) vals[c] = -3.0 + c * 0.5;
    const Matrix a = with_spectrum(vals, rng);
    const auto top = top_eigenpair(a);
    CHECK(top.value == doctest::Approx(vals.back()).epsilon(1e-9));
    CHECK(top.vector.norm() == doctest::Approx(1.0));
    CHECK((a * top.vector - top.value * top.vector).norm() <= 1e-7);
    CHECK(min_eigenvalue(a) == doctest::Approx(-3.0).epsilon(1e-9));
  }
}

TEST_CASE("power iteration handles indefinite matrices") {
  Rng rng(2);
  const Matrix a = with_spectrum({-10.0, -1.0, 0.5, 2.0}, rng);
  const auto p = power_iteration(a);
  CHECK(p.value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK((a * p.vector - 2.0 * p.vector).norm() <= 1e-4);
  // Equal top eigenvalues cannot be separated but the value settles.
  const Matrix b = with_spectrum({1.0, 3.0, 3.0}, rng);
  CHECK(power_iteration(b).value == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("inverse square root") {
  Rng rng(3);
  const Matrix a = with_spectrum({0.25, 1.0, 4.0, 9.0}, rng);
  const Matrix s = inverse_sqrt_psd(a);
  CHECK((s - s.transpose()).norm() <= 1e-12);
  CHECK((s * a * s - Matrix::Identity(4, 4)).norm() <= 1e-10);
  CHECK_THROWS_AS(inverse_sqrt_psd(with_spectrum({0.0, 1.0}, rng)), ValidationError);
}
