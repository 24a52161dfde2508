#pragma once

#include "trunreg/datagen.hpp"
#include "trunreg/sgd.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace trunreg {

enum class Method { psgd, ols };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct ExperimentPlan {
  std::string name;
  std::vector<std::size_t> n_grid;
  std::vector<std::uint64_t> seeds;
  nlohmann::json generator;  ///< generator spec JSON, see parse_generator()
  SgdConfig sgd;
  std::vector<Method> methods;
  std::string output_path;

  /// n_grid nonempty and strictly ascending, seeds and methods nonempty,
  /// generator parses.
  void validate() const;
};

ExperimentPlan parse_plan(const nlohmann::json& j);
nlohmann::json plan_to_json(const ExperimentPlan& plan);

/// k = 10, w* = 1, x ~ N(0, I) clipped at 6, keep y > 4 and w*^T x < 2,
/// n in {250, ..., 8000}, nine seeds, a = 0.05, B_cov = 6, C_norm = 4,
/// lambda = 7.5e-5, 300 passes, projection tolerance 1e-2.
ExperimentPlan truncated_regression_plan();

struct ResultRow {
  std::string name;
  std::size_t n;
  std::uint64_t seed;
  Method method;
  double l2_error;
  double wall_ms;
};

/// One row per (n, seed, method), sorted in that order. Cells run on up to
/// `threads` workers; each cell derives its own seeds from (seed, n), so the
/// rows do not depend on scheduling.
std::vector<ResultRow> run_experiment(const ExperimentPlan& plan, unsigned threads = 1);

/// Header name,n,seed,method,l2_error,wall_ms; errors at 17 significant digits.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

/// Median l2_error over seeds for each n.
std::map<std::size_t, double> median_errors(const std::vector<ResultRow>& rows, Method method);

/// Least-squares slope of log(median error) against log(n). Throws
/// ValidationError with fewer than three distinct n.
double fit_rate(const std::vector<ResultRow>& rows, Method method);

struct ReluDemoConfig {
  std::size_t k = 5;
  std::vector<std::size_t> n_grid{500, 4000};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9};
  SgdConfig sgd;
};

ReluDemoConfig default_relu_demo();

/// Noisy-ReLU learning through the truncated-regression reduction; rows use
/// method psgd and n counts observations before censored ones are dropped.
std::vector<ResultRow> run_relu_demo(const ReluDemoConfig& cfg);

}  // namespace trunreg
