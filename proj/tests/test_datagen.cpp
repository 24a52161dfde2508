#include "trunreg/datagen.hpp"
#include "trunreg/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace trunreg;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
}  // namespace

TEST_CASE("untruncated generation accepts everything") {
  GeneratorSpec spec;
  spec.w_star = Vector::Ones(3);
  spec.covariates = GaussianCovariates{3, std::nullopt};
  GenerationStats stats;
  const auto data = generate(spec, 500, 1, &stats);
  CHECK(data.n() == 500);
  CHECK(data.k() == 3);
  CHECK(stats.attempts == 500);
  CHECK(stats.accepted == 500);
}

TEST_CASE("half-line acceptance at w* = 0 is one half") {
  GeneratorSpec spec;
  spec.w_star = Vector::Zero(2);
  spec.covariates = GaussianCovariates{2, std::nullopt};
  spec.set = TruncationSet::half_line(0.0);
  GenerationStats stats;
  const auto data = generate(spec, 5000, 2, &stats);
  const double rate = static_cast<double>(stats.accepted) / stats.attempts;
  CHECK(std::abs(rate - 0.5) <= 3.0 * std::sqrt(0.25 / stats.attempts));
  for (std::size_t i = 0; i < data.n(); ++i) CHECK(data.responses[i] >= 0.0);
}

TEST_CASE("benchmark design: both filters hold and acceptance matches Monte Carlo") {
  const auto spec = parse_generator(nlohmann::json::parse(
      R"({"k":10,"covariates":{"type":"gaussian","clip":6},"set":{"type":"halfline","from":4},
          "filter":{"type":"wstar_dot_below","threshold":2}})"));
  GenerationStats stats;
  const auto data = generate(spec, 2000, 3, &stats);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto s = data.sample(i);
    REQUIRE(s.y >= 4.0);
    REQUIRE(spec.w_star.dot(s.x) < 2.0);
  }
  // w*^T x ~ N(0, 10) and y | x ~ N(w*^T x, 1): P(y >= 4, w*^T x < 2) by quadrature.
  const double sd = std::sqrt(10.0);
  const double p = oracle::simpson(
      [&](double t) {
        const double density = std::exp(-0.5 * t * t / 10.0) / (sd * std::sqrt(2.0 * M_PI));
        return density * (1.0 - normal_cdf(4.0 - t));
      },
      -40.0, 2.0, 1e-14);
  const double rate = static_cast<double>(stats.accepted) / stats.attempts;
  CHECK(std::abs(rate - p) <= 3.0 * std::sqrt(p * (1 - p) / stats.attempts));
}

TEST_CASE("attempt budget") {
  GeneratorSpec spec;
  spec.w_star = Vector::Zero(1);
  spec.covariates = GaussianCovariates{1, std::nullopt};
  spec.set = TruncationSet::half_line(40.0);
  spec.max_attempts_per_sample = 1000;
  CHECK_THROWS_AS(generate(spec, 1, 1), NumericError);
  spec.max_attempts_per_sample = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  GeneratorSpec mismatch;
  mismatch.w_star = Vector::Zero(2);
  mismatch.covariates = GaussianCovariates{3, std::nullopt};
  CHECK_THROWS_AS(mismatch.validate(), ValidationError);
}

TEST_CASE("generation is deterministic and order-stable") {
  GeneratorSpec spec;
  spec.w_star = Vector::Ones(4);
  spec.covariates = GaussianCovariates{4, 6.0};
  spec.set = TruncationSet::half_line(1.0);
  const auto a = generate(spec, 300, 11);
  const auto b = generate(spec, 300, 11);
  CHECK(a.covariates == b.covariates);
  CHECK(a.responses == b.responses);
  // Sample i depends only on (seed, i).
  const auto prefix = generate(spec, 100, 11);
  CHECK(prefix.responses == a.responses.head(100));
}

TEST_CASE("conditional law of accepted responses") {
  GeneratorSpec spec;
  spec.w_star = (Vector(2) << 0.5, -1.0).finished();
  Vector x(2);
  x << 1.0, 0.8;
  spec.covariates = FixedCovariates{{x}};
  spec.set = TruncationSet::intervals({{-1.0, 0.0}, {1.0, kInf}});
  const auto data = generate(spec, 10'000, 4);
  std::vector<double> ys(data.responses.data(), data.responses.data() + data.n());
  const oracle::TruncatedNormal ref(spec.w_star.dot(x), {{-1.0, 0.0}, {1.0, kInf}});
  CHECK(oracle::ks_pvalue(ys, [&](double z) { return ref.cdf(z); }) > 0.01);
}

TEST_CASE("least squares") {
  RowMatrix x(2, 1);
  x << 1, 2;
  Vector y(2);
  y << 2, 4.2;
  CHECK(ols(Dataset(x, y))[0] == doctest::Approx(2.08).epsilon(1e-14));

  Rng rng(5);
  RowMatrix xr(30, 4);
  for (Eigen::Index i = 0; i < xr.size(); ++i) xr.data()[i] = standard_normal(rng);
  Vector w(4);
  w << 1, -2, 0.5, 3;
  const Vector yr = xr * w;
  CHECK((ols(Dataset(xr, yr)) - w).norm() <= 1e-10);

  RowMatrix rank(3, 2);
  rank << 1, 2, 2, 4, 3, 6;
  CHECK_THROWS_AS(ols(Dataset(rank, Vector::Ones(3))), NumericError);
}

TEST_CASE("least squares is biased under the benchmark truncation") {
  const auto spec = parse_generator(nlohmann::json::parse(
      R"({"k":10,"covariates":{"type":"gaussian","clip":6},"set":{"type":"halfline","from":4},
          "filter":{"type":"wstar_dot_below","threshold":2}})"));
  const auto data = generate(spec, 10'000, 6);
  CHECK((ols(data) - spec.w_star).norm() > 2.0);
}

TEST_CASE("ReLU reduction") {
  std::vector<Sample> positive = {{Vector::Ones(2), 0.4}, {Vector::Zero(2), 2.0}};
  const auto [data, set] = relu_reduce(positive);
  CHECK(data.n() == 2);
  CHECK(data.responses[1] == 2.0);
  CHECK(membership(set, 1e-9));
  CHECK_FALSE(membership(set, -1e-9));

  CHECK_THROWS_AS(relu_reduce({{Vector::Ones(2), 0.0}, {Vector::Ones(2), 0.0}}), ValidationError);
  CHECK_THROWS_AS(relu_reduce({{Vector::Ones(2), -0.1}}), ValidationError);
}

TEST_CASE("ReLU survival fraction") {
  const int k = 5;
  const Vector w = Vector::Ones(k) / std::sqrt(double(k));
  Rng rng(7);
  std::vector<Vector> inputs;
  double expected = 0.0;
  for (int i = 0; i < 20'000; ++i) {
    Vector x(k);
    for (int c = 0; c < k; ++c) x[c] = standard_normal(rng);
    expected += normal_cdf(w.dot(x));
    inputs.push_back(x);
  }
  expected /= inputs.size();
  const auto pairs = relu_forward(w, inputs, rng);
  const auto [data, set] = relu_reduce(pairs);
  const double frac = static_cast<double>(data.n()) / inputs.size();
  CHECK(std::abs(frac - expected) <= 3.0 * std::sqrt(expected * (1 - expected) / inputs.size()));
}

TEST_CASE("CSV round trip is exact") {
  Rng rng(8);
  RowMatrix x(25, 3);
  Vector y(25);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng) * std::pow(10.0, (i % 7) - 3);
  for (int i = 0; i < 25; ++i) y[i] = standard_normal(rng) / 3.0;
  std::stringstream ss;
  write_csv(ss, Dataset(x, y));
  CHECK(ss.str().substr(0, 9) == "x1,x2,x3,");
  const auto back = read_csv(ss);
  CHECK(back.covariates == x);
  CHECK(back.responses == y);

  std::stringstream bad("x1,y\n1.0\n");
  CHECK_THROWS_AS(read_csv(bad), ValidationError);
}

TEST_CASE("generator JSON") {
  const auto spec = parse_generator(nlohmann::json::parse(R"({"w_star":[1,2,3],"set":{"type":"halfline","from":0}})"));
  CHECK(spec.w_star.size() == 3);
  CHECK_FALSE(membership(spec.set, -0.5));
  CHECK_THROWS_AS(parse_generator(nlohmann::json::parse(R"({"covariates":{}})")), ValidationError);
  CHECK_THROWS_AS(parse_generator(nlohmann::json::parse(R"({"k":2,"filter":{"type":"other"}})")), ValidationError);
}
