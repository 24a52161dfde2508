// Command-line front end: data generation, estimation and the experiment harness.

#include "trunreg/datagen.hpp"
#include "trunreg/dataset.hpp"
#include "trunreg/experiment.hpp"
#include "trunreg/sets.hpp"
#include "trunreg/sgd.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using trunreg::NumericError;
using trunreg::ValidationError;
using json = nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// Writes to `path`, or stdout when the path is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  fn(out);
}

trunreg::Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("not a number in vector: '" + item + "'");
    }
  }
  if (values.empty()) throw ValidationError("empty vector");
  return Eigen::Map<trunreg::Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json vector_json(const trunreg::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void report_rates(const std::vector<trunreg::ResultRow>& rows, const std::vector<trunreg::Method>& methods) {
  for (auto m : methods) {
    for (const auto& [n, median] : trunreg::median_errors(rows, m))
      std::cerr << trunreg::to_string(m) << " n=" << n << " median_error=" << median << '\n';
    if (trunreg::median_errors(rows, m).size() >= 3)
      std::cerr << trunreg::to_string(m) << " slope=" << trunreg::fit_rate(rows, m) << '\n';
  }
}

trunreg::ReluDemoConfig parse_relu_config(const json& j) {
  auto cfg = trunreg::default_relu_demo();
  if (j.contains("k")) cfg.k = j.at("k").get<std::size_t>();
  if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("sgd")) cfg.sgd = trunreg::parse_sgd_config(j.at("sgd"), cfg.sgd);
  if (cfg.k == 0 || cfg.n_grid.empty() || cfg.seeds.empty())
    throw ValidationError("relu demo needs k > 0 and nonempty n_grid and seeds");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear regression from truncated samples"};
  app.require_subcommand(1);

  std::string config, out, set_path, data_path, w_text, results_path, method_name = "psgd";
  std::uint64_t seed = 0;
  std::size_t n = 0;
  unsigned threads = 1;
  double a_target = 0.0, b2_target = 0.0;

  auto* gen = app.add_subcommand("generate", "sample a truncated dataset from a generator spec");
  gen->add_option("--config", config, "generator spec JSON")->required();
  gen->add_option("-n", n, "number of samples")->required();
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--out", out, "output CSV (default stdout)");

  auto* est = app.add_subcommand("estimate", "fit the truncated regression model");
  est->add_option("--data", data_path, "dataset CSV")->required();
  est->add_option("--set", set_path, "truncation set JSON")->required();
  est->add_option("--config", config, "SGD config JSON");
  auto* est_seed = est->add_option("--seed", seed, "random seed (overrides config)");
  est->add_option("--out", out, "output JSON (default stdout)");

  auto* exp = app.add_subcommand("experiment", "run an experiment plan (default: the k = 10 benchmark)");
  exp->add_option("--config", config, "plan JSON");
  exp->add_option("--out", out, "results CSV (default: the plan's output_path)");
  exp->add_option("--threads", threads, "worker threads");
  auto* exp_seed = exp->add_option("--seed", seed, "SGD seed (overrides the plan)");

  auto* relu = app.add_subcommand("relu-demo", "learn a noisy ReLU through the truncation reduction");
  relu->add_option("--config", config, "demo JSON (k, n_grid, seeds, sgd)");
  relu->add_option("--out", out, "results CSV (default stdout)");
  auto* relu_seed = relu->add_option("--seed", seed, "SGD seed (overrides config)");

  auto* chk = app.add_subcommand("check-assumptions", "report thickness and survival diagnostics");
  chk->add_option("--data", data_path, "dataset CSV")->required();
  chk->add_option("--set", set_path, "truncation set JSON")->required();
  chk->add_option("--w", w_text, "reference coefficients, comma separated (default: OLS)");
  chk->add_option("--a", a_target, "survival constant to certify");
  chk->add_option("--b2", b2_target, "thickness constant to certify");
  chk->add_option("--out", out, "output JSON (default stdout)");

  auto* rate = app.add_subcommand("fit-rate", "log-log slope of median error against n");
  rate->add_option("--results", results_path, "results CSV")->required();
  rate->add_option("--method", method_name, "psgd or ols");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) {
      const auto spec = trunreg::parse_generator(read_json(config));
      trunreg::GenerationStats stats;
      const auto data = trunreg::generate(spec, n, seed, &stats);
      with_output(out, [&](std::ostream& os) { trunreg::write_csv(os, data); });
      std::cerr << "accepted " << stats.accepted << " of " << stats.attempts << " draws\n";
    } else if (*est) {
      const auto data = trunreg::read_csv(data_path);
      const auto set = trunreg::parse_set(read_json(set_path));
      auto cfg = config.empty() ? trunreg::SgdConfig{} : trunreg::parse_sgd_config(read_json(config));
      if (*est_seed) cfg.seed = seed;
      const auto result = trunreg::estimate(data, set, cfg);
      json j = {{"w_hat", vector_json(result.w_hat)},
                {"n", data.n()},
                {"k", data.k()},
                {"steps", result.steps},
                {"rejected_steps", result.rejected_steps},
                {"lambda", result.lambda},
                {"projection",
                 {{"oracle_calls", result.projection.oracle_calls},
                  {"ellipsoid_runs", result.projection.ellipsoid_runs},
                  {"bisection_steps", result.projection.bisection_steps}}},
                {"config", trunreg::sgd_config_to_json(cfg)}};
      with_output(out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    } else if (*exp) {
      auto plan = config.empty() ? trunreg::truncated_regression_plan() : trunreg::parse_plan(read_json(config));
      if (*exp_seed) plan.sgd.seed = seed;
      const auto rows = trunreg::run_experiment(plan, threads);
      with_output(out.empty() ? plan.output_path : out,
                  [&](std::ostream& os) { trunreg::write_results_csv(os, rows); });
      report_rates(rows, plan.methods);
    } else if (*relu) {
      auto cfg = config.empty() ? trunreg::default_relu_demo() : parse_relu_config(read_json(config));
      if (*relu_seed) cfg.sgd.seed = seed;
      const auto rows = trunreg::run_relu_demo(cfg);
      with_output(out, [&](std::ostream& os) { trunreg::write_results_csv(os, rows); });
      report_rates(rows, {trunreg::Method::psgd});
    } else if (*chk) {
      const auto data = trunreg::read_csv(data_path);
      const auto set = trunreg::parse_set(read_json(set_path));
      const trunreg::Vector w = w_text.empty() ? trunreg::ols(data) : parse_vector(w_text);
      const auto rep = trunreg::check_assumptions(data, w, set, a_target, b2_target);
      json j = {{"w_ref", vector_json(w)},
                {"min_eigenvalue", rep.min_eigenvalue},
                {"max_leverage", rep.max_leverage},
                {"leverage_cap", rep.leverage_cap},
                {"thickness_ok", rep.thickness_ok},
                {"implied_a", rep.implied_a ? json(*rep.implied_a) : json(nullptr)},
                {"survival_ok", rep.survival_ok}};
      with_output(out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    } else if (*rate) {
      std::ifstream in(results_path);
      if (!in) throw ValidationError("cannot open " + results_path);
      const auto rows = trunreg::read_results_csv(in);
      std::cout << trunreg::fit_rate(rows, trunreg::parse_method(method_name)) << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
