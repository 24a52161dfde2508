#include "trunreg/experiment.hpp"

#include "trunreg/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace trunreg {

namespace {

struct Cell {
  std::size_t n;
  std::uint64_t seed;
};

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Runs every method of one (n, seed) cell on a shared dataset.
std::vector<ResultRow> run_cell(const ExperimentPlan& plan, const GeneratorSpec& spec, const Cell& cell) {
  const Dataset data = generate(spec, cell.n, mix_seed(cell.seed, cell.n));
  std::vector<ResultRow> rows;
  for (Method m : plan.methods) {
    const auto start = std::chrono::steady_clock::now();
    Vector w_hat;
    if (m == Method::ols) {
      w_hat = ols(data);
    } else {
      SgdConfig cfg = plan.sgd;
      cfg.seed = mix_seed(plan.sgd.seed ^ cell.seed, cell.n + 0x5eedULL);
      w_hat = estimate(data, spec.set, cfg).w_hat;
    }
    const std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - start;
    rows.push_back({plan.name, cell.n, cell.seed, m, (w_hat - spec.w_star).norm(), took.count()});
  }
  return rows;
}

}  // namespace

std::string to_string(Method m) { return m == Method::psgd ? "psgd" : "ols"; }

Method parse_method(const std::string& s) {
  if (s == "psgd") return Method::psgd;
  if (s == "ols") return Method::ols;
  throw ValidationError("unknown method '" + s + "'");
}

void ExperimentPlan::validate() const {
  if (n_grid.empty()) throw ValidationError("plan: n_grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw ValidationError("plan: n_grid entries must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ValidationError("plan: n_grid must be strictly ascending");
  }
  if (seeds.empty()) throw ValidationError("plan: seeds is empty");
  if (methods.empty()) throw ValidationError("plan: methods is empty");
  parse_generator(generator);
  sgd.validate();
}

ExperimentPlan parse_plan(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("plan must be a JSON object");
  ExperimentPlan plan;
  try {
    plan.name = j.value("name", std::string("experiment"));
    plan.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    plan.generator = j.at("generator");
    if (j.contains("sgd")) plan.sgd = parse_sgd_config(j.at("sgd"));
    for (const auto& m : j.at("methods")) plan.methods.push_back(parse_method(m.get<std::string>()));
    plan.output_path = j.value("output_path", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

nlohmann::json plan_to_json(const ExperimentPlan& plan) {
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : plan.methods) methods.push_back(to_string(m));
  return {{"name", plan.name},          {"n_grid", plan.n_grid},           {"seeds", plan.seeds},
          {"generator", plan.generator}, {"sgd", sgd_config_to_json(plan.sgd)}, {"methods", methods},
          {"output_path", plan.output_path}};
}

ExperimentPlan truncated_regression_plan() {
  ExperimentPlan plan;
  plan.name = "truncated_regression_k10";
  plan.n_grid = {250, 500, 1000, 2000, 4000, 8000};
  plan.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  plan.generator = {{"k", 10},
                    {"w_star_fill", 1.0},
                    {"covariates", {{"type", "gaussian"}, {"clip", 6.0}}},
                    {"set", {{"type", "halfline"}, {"from", 4.0}}},
                    {"filter", {{"type", "wstar_dot_below"}, {"threshold", 2.0}}}};
  plan.sgd.a = 0.05;
  plan.sgd.b_cov = 6.0;
  plan.sgd.c_norm = 4.0;
  // Smallest curvature of the normalized likelihood near w* is about 7.6e-5.
  // The z-draw at an independent index makes the gradient noise large relative
  // to that curvature, so many passes are needed before averaging reaches the
  // likelihood's own statistical error.
  plan.sgd.lambda = 7.5e-5;
  plan.sgd.passes = 300;
  plan.sgd.projection_tol = 1e-2;
  plan.methods = {Method::psgd, Method::ols};
  plan.output_path = "truncated_regression_k10.csv";
  return plan;
}

std::vector<ResultRow> run_experiment(const ExperimentPlan& plan, unsigned threads) {
  plan.validate();
  const GeneratorSpec spec = parse_generator(plan.generator);
  std::vector<Cell> cells;
  for (std::size_t n : plan.n_grid)
    for (std::uint64_t s : plan.seeds) cells.push_back({n, s});

  std::vector<std::vector<ResultRow>> out(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells.size(); c = next++) {
      try {
        out[c] = run_cell(plan, spec, cells[c]);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!errors[c]) continue;
    const std::string where = "n=" + std::to_string(cells[c].n) + " seed=" + std::to_string(cells[c].seed);
    try {
      std::rethrow_exception(errors[c]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError(where + ": " + e.what());
    }
  }
  std::vector<ResultRow> rows;
  for (auto& cell_rows : out) rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "name,n,seed,method,l2_error,wall_ms\n";
  for (const auto& r : rows) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.wall_ms);
    out << r.name << ',' << r.n << ',' << r.seed << ',' << to_string(r.method) << ',' << format_g17(r.l2_error)
        << ',' << ms << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("name,n,seed,method,l2_error", 0) != 0)
    throw ValidationError("results CSV must start with the header name,n,seed,method,l2_error,wall_ms");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 6) throw ValidationError("results CSV row has wrong arity: " + line);
    try {
      rows.push_back({cells[0], std::stoul(cells[1]), std::stoull(cells[2]), parse_method(cells[3]),
                      std::stod(cells[4]), std::stod(cells[5])});
    } catch (const std::logic_error& e) {
      throw ValidationError("results CSV: cannot parse row: " + line);
    }
  }
  return rows;
}

std::map<std::size_t, double> median_errors(const std::vector<ResultRow>& rows, Method method) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& r : rows)
    if (r.method == method) by_n[r.n].push_back(r.l2_error);
  std::map<std::size_t, double> out;
  for (auto& [n, errs] : by_n) out[n] = median(std::move(errs));
  return out;
}

double fit_rate(const std::vector<ResultRow>& rows, Method method) {
  const auto med = median_errors(rows, method);
  if (med.size() < 3) throw ValidationError("fit_rate: need at least three distinct n for " + to_string(method));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, e] : med) {
    if (!(e > 0.0)) throw ValidationError("fit_rate: errors must be positive to take logs");
    const double lx = std::log(static_cast<double>(n));
    const double ly = std::log(e);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(med.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ReluDemoConfig default_relu_demo() {
  ReluDemoConfig cfg;
  cfg.sgd.a = 0.05;
  cfg.sgd.b_cov = 6.0;
  cfg.sgd.c_norm = 2.0;
  cfg.sgd.passes = 3;
  return cfg;
}

std::vector<ResultRow> run_relu_demo(const ReluDemoConfig& cfg) {
  const Vector w_star = Vector::Constant(static_cast<Eigen::Index>(cfg.k), 1.0 / std::sqrt(static_cast<double>(cfg.k)));
  std::vector<ResultRow> rows;
  for (std::size_t n : cfg.n_grid) {
    for (std::uint64_t seed : cfg.seeds) {
      const auto start = std::chrono::steady_clock::now();
      Rng rng(mix_seed(seed, n));
      std::vector<Vector> inputs(n);
      for (auto& x : inputs) {
        x.resize(static_cast<Eigen::Index>(cfg.k));
        for (Eigen::Index c = 0; c < x.size(); ++c) x[c] = std::clamp(standard_normal(rng), -cfg.sgd.b_cov, cfg.sgd.b_cov);
      }
      const auto [data, set] = relu_reduce(relu_forward(w_star, inputs, rng));
      SgdConfig sgd = cfg.sgd;
      sgd.seed = mix_seed(cfg.sgd.seed ^ seed, n + 0x5eedULL);
      const Vector w_hat = estimate(data, set, sgd).w_hat;
      const std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - start;
      rows.push_back({"relu_k" + std::to_string(cfg.k), n, seed, Method::psgd, (w_hat - w_star).norm(), took.count()});
    }
  }
  return rows;
}

}  // namespace trunreg
