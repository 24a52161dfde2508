#include "trunreg/likelihood.hpp"
#include "trunreg/random.hpp"
#include "trunreg/sampler.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

using namespace trunreg;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogRoot2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Vector e1(int k) {
  Vector v = Vector::Zero(k);
  v[0] = 1.0;
  return v;
}

// Random truncated instance: x ~ N(0, I), y ~ N(w*^T x, 1, S).
Dataset random_instance(std::size_t n, int k, const TruncationSet& s, Rng& rng) {
  RowMatrix x(n, k);
  Vector y(n);
  Vector w(k);
  for (int c = 0; c < k; ++c) w[c] = standard_normal(rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) x(i, c) = standard_normal(rng);
    y[i] = sample_truncated(x.row(i).dot(w), s, SamplerAccuracy{}, rng);
  }
  return Dataset(x, y);
}
}  // namespace

TEST_CASE("nll_single examples") {
  const Vector w0 = Vector::Zero(2);
  CHECK(nll_single(w0, {Vector::Zero(2), 0.0}, TruncationSet::real_line()) == doctest::Approx(0.918939).epsilon(1e-6));

  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    Vector w(3), x(3);
    for (int c = 0; c < 3; ++c) {
      w[c] = 2 * standard_normal(rng);
      x[c] = standard_normal(rng);
    }
    const double y = 3 * standard_normal(rng);
    const double r = y - w.dot(x);
    CHECK(nll_single(w, {x, y}, TruncationSet::real_line()) == doctest::Approx(0.5 * r * r + kLogRoot2Pi).epsilon(1e-12));
  }

  const double expected = 0.5 + std::log(std::sqrt(2.0 * std::numbers::pi) * 0.5);
  CHECK(expected == doctest::Approx(0.725791).epsilon(1e-6));
  CHECK(nll_single(w0, {Vector::Zero(2), 1.0}, TruncationSet::half_line(0.0)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(nll_single(w0, {Vector::Zero(2), -1.0}, TruncationSet::half_line(0.0)), ValidationError);
}

TEST_CASE("nll_single against quadrature of the normalizer") {
  Rng rng(2);
  const std::vector<std::pair<double, double>> iv = {{-2.0, -0.5}, {1.0, 4.0}};
  const auto s = TruncationSet::intervals({{-2.0, -0.5}, {1.0, 4.0}});
  for (int t = 0; t < 20; ++t) {
    Vector w(2), x(2);
    for (int c = 0; c < 2; ++c) {
      w[c] = 3 * standard_normal(rng);
      x[c] = standard_normal(rng);
    }
    const double mu = w.dot(x);
    const double y = 2.0;
    // log integral_S exp(-z^2/2 + z mu) dz = mu^2/2 + log sqrt(2 pi) + log P_mu(S).
    const oracle::TruncatedNormal ref(mu, iv);
    const double oracle_nll = 0.5 * y * y - y * mu + 0.5 * mu * mu + kLogRoot2Pi + ref.log_mass();
    CHECK(nll_single(w, {x, y}, s) == doctest::Approx(oracle_nll).epsilon(1e-10));
  }
}

TEST_CASE("grad_fi examples") {
  const Vector w = Vector::Zero(3);
  CHECK(grad_fi(w, {Vector::Ones(3), 0.0}, Vector::Ones(3), 0.0).norm() == 0.0);
  CHECK_THROWS_AS(grad_fi(w, {Vector::Ones(2), 0.0}, Vector::Ones(3), 0.0), ValidationError);

  const int draws = 100'000;
  Rng rng(3);
  {
    Vector wv = e1(2) * 1.3;
    const double yi = 0.4;
    double sum = 0.0, sq = 0.0;
    for (int d = 0; d < draws; ++d) {
      const double z = sample_truncated(wv.dot(e1(2)), TruncationSet::real_line(), SamplerAccuracy{}, rng);
      const double v = grad_fi(wv, {e1(2), yi}, e1(2), z)[0];
      sum += v;
      sq += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sq / draws - mean * mean) / draws);
    CHECK(std::abs(mean - (-yi + 1.3)) <= 3 * se);
  }
  {
    const auto s = TruncationSet::half_line(0.0);
    double sum = 0.0, sq = 0.0;
    for (int d = 0; d < draws; ++d) {
      const double z = sample_truncated(0.0, s, SamplerAccuracy{}, rng);
      const double v = grad_fi(Vector::Zero(2), {e1(2), 0.9}, e1(2), z)[0];
      sum += v;
      sq += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sq / draws - mean * mean) / draws);
    const double truncated_mean = oracle::TruncatedNormal(0.0, {{0.0, kInf}}).mean();
    CHECK(truncated_mean == doctest::Approx(0.79788).epsilon(1e-5));
    CHECK(std::abs(mean - (-0.9 + truncated_mean)) <= 3 * se);
  }
}

TEST_CASE("stochastic direction is unbiased for the population gradient") {
  Rng rng(4);
  const auto s = TruncationSet::intervals({{-1.0, 0.5}, {1.5, kInf}});
  const auto data = random_instance(6, 2, s, rng);
  Vector w(2);
  w << 0.3, -0.7;
  const Vector g = population_gradient(w, data, s);
  const int draws = 100'000;
  Vector sum = Vector::Zero(2), sq = Vector::Zero(2);
  for (int d = 0; d < draws; ++d) {
    const auto i = static_cast<std::size_t>(rng() % data.n());
    const auto j = static_cast<std::size_t>(rng() % data.n());
    const Vector xj = data.sample(j).x;
    const double z = sample_truncated(w.dot(xj), s, SamplerAccuracy{}, rng);
    const Vector v = grad_fi(w, data.sample(i), xj, z);
    sum += v;
    sq += v.cwiseProduct(v);
  }
  const Vector mean = sum / draws;
  for (int c = 0; c < 2; ++c) {
    const double se = std::sqrt((sq[c] / draws - mean[c] * mean[c]) / draws);
    CHECK(std::abs(mean[c] - g[c]) <= 3 * se);
  }
}

TEST_CASE("population_gradient examples") {
  Rng rng(5);
  const auto data = random_instance(15, 3, TruncationSet::real_line(), rng);
  Vector w(3);
  w << 0.2, -1.0, 0.5;
  Vector ls = Vector::Zero(3);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto s = data.sample(i);
    ls += (w.dot(s.x) - s.y) * s.x;
  }
  ls /= data.n();
  CHECK((population_gradient(w, data, TruncationSet::real_line()) - ls).norm() <= 1e-12);

  RowMatrix x(1, 2);
  x << 1.0, 1.0;
  Vector y(1);
  y << 0.0;
  Vector wsym(2);
  wsym << 1.0, -1.0;
  const auto g = population_gradient(wsym, Dataset(x, y), TruncationSet::intervals({{-2, -1}, {1, 2}}));
  CHECK(g.norm() <= 1e-12);
}

TEST_CASE("population_gradient matches finite differences") {
  Rng rng(6);
  const std::vector<TruncationSet> sets = {TruncationSet::half_line(0.5), TruncationSet::intervals({{-3, -1}, {0, 2}}),
                                           TruncationSet::intervals({{-kInf, -1}, {1, kInf}})};
  for (int k = 1; k <= 5; ++k) {
    for (const auto& s : sets) {
      const auto data = random_instance(12, k, s, rng);
      std::vector<double> w(k);
      for (auto& v : w) v = 0.5 * standard_normal(rng);
      auto f = [&](const std::vector<double>& u) {
        return nll_mean(Eigen::Map<const Vector>(u.data(), k), data, s);
      };
      const auto fd = oracle::central_gradient(f, w, 1e-5);
      const Vector g = population_gradient(Eigen::Map<const Vector>(w.data(), k), data, s);
      const double scale = std::max(1.0, g.norm());
      for (int c = 0; c < k; ++c) CHECK(std::abs(g[c] - fd[c]) <= 1e-5 * scale);
    }
  }
}

TEST_CASE("hessian_quadrature examples") {
  Rng rng(7);
  const auto data = random_instance(10, 3, TruncationSet::real_line(), rng);
  Matrix xx = Matrix::Zero(3, 3);
  for (std::size_t i = 0; i < data.n(); ++i) xx += data.sample(i).x * data.sample(i).x.transpose();
  xx /= data.n();
  CHECK((hessian_quadrature(Vector::Ones(3), data, TruncationSet::real_line()) - xx).norm() <= 1e-12);

  RowMatrix x = RowMatrix::Zero(1, 3);
  x(0, 0) = 1.0;
  Vector y(1);
  y << 1.0;
  const Matrix h = hessian_quadrature(Vector::Zero(3), Dataset(x, y), TruncationSet::half_line(0.0));
  const double var = oracle::TruncatedNormal(0.0, {{0.0, kInf}}).variance();
  CHECK(var == doctest::Approx(0.36338).epsilon(1e-4));
  CHECK(h(0, 0) == doctest::Approx(var).epsilon(1e-9));
  CHECK(h.norm() - std::abs(h(0, 0)) <= 1e-15);
}

TEST_CASE("hessian matches finite differences of the gradient and is PSD") {
  Rng rng(8);
  const auto s = TruncationSet::intervals({{-1.0, 0.0}, {0.7, 3.0}});
  for (int t = 0; t < 10; ++t) {
    const int k = 1 + t % 4;
    const auto data = random_instance(8, k, s, rng);
    Vector w(k);
    for (int c = 0; c < k; ++c) w[c] = standard_normal(rng);
    const Matrix h = hessian_quadrature(w, data, s);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().minCoeff() >= -1e-8);
    for (int c = 0; c < k; ++c) {
      Vector up = w, down = w;
      up[c] += 1e-5;
      down[c] -= 1e-5;
      const Vector col = (population_gradient(up, data, s) - population_gradient(down, data, s)) / 2e-5;
      CHECK((col - h.col(c)).norm() <= 1e-5 * std::max(1.0, h.norm()));
    }
  }
}

TEST_CASE("truncated_moments against quadrature") {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const double mu = -15.0 + 30.0 * uniform_open01(rng);
    std::vector<Interval> iv;
    std::vector<std::pair<double, double>> pairs;
    double at = -10.0 + 4.0 * uniform_open01(rng);
    for (int p = 0; p < 1 + t % 4; ++p) {
      const double len = (t % 7 == 0 ? 1e-4 : 0.05) + 3.0 * uniform_open01(rng);
      iv.push_back({at, at + len});
      pairs.emplace_back(at, at + len);
      at += len + 0.1 + 4.0 * uniform_open01(rng);
    }
    const auto m = truncated_moments(mu, TruncationSet::intervals(iv));
    const oracle::TruncatedNormal ref(mu, pairs);
    CHECK(m.log_mass == doctest::Approx(ref.log_mass()).epsilon(1e-9));
    CHECK(std::abs(m.mean - ref.mean()) <= 1e-8 * std::max(1.0, std::abs(ref.mean())));
    CHECK(std::abs(m.variance - ref.variance()) <= 1e-7 * std::max(1e-3, ref.variance()));
  }
}

TEST_CASE("hessian is positive definite on a well-posed instance") {
  Rng rng(10);
  const auto s = TruncationSet::half_line(0.0);
  const auto data = random_instance(200, 3, s, rng);
  const Matrix h = hessian_quadrature(Vector::Zero(3), data, s);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().minCoeff() > 0.05);
}
