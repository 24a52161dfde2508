#include "trunreg/datagen.hpp"

#include "trunreg/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trunreg {

namespace {

std::size_t source_dimension(const CovariateSource& src) {
  if (const auto* g = std::get_if<GaussianCovariates>(&src)) return g->k;
  if (const auto* f = std::get_if<FixedCovariates>(&src)) return f->list.empty() ? 0 : static_cast<std::size_t>(f->list.front().size());
  return std::get<CustomCovariates>(src).k;
}

Vector draw_covariate(const CovariateSource& src, std::size_t index, Rng& rng) {
  if (const auto* g = std::get_if<GaussianCovariates>(&src)) {
    Vector x(static_cast<Eigen::Index>(g->k));
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      x[c] = standard_normal(rng);
      if (g->clip) x[c] = std::clamp(x[c], -*g->clip, *g->clip);
    }
    return x;
  }
  if (const auto* f = std::get_if<FixedCovariates>(&src)) return f->list[index % f->list.size()];
  return std::get<CustomCovariates>(src).draw(rng);
}

}  // namespace

void GeneratorSpec::validate() const {
  if (w_star.size() == 0) throw ValidationError("generator: w_star is empty");
  if (const auto* f = std::get_if<FixedCovariates>(&covariates)) {
    if (f->list.empty()) throw ValidationError("generator: fixed covariate list is empty");
    for (const auto& x : f->list)
      if (x.size() != w_star.size()) throw ValidationError("generator: fixed covariates disagree with w_star");
  }
  if (const auto* c = std::get_if<CustomCovariates>(&covariates); c && !c->draw)
    throw ValidationError("generator: custom covariate source has no draw function");
  if (source_dimension(covariates) != static_cast<std::size_t>(w_star.size()))
    throw ValidationError("generator: covariate dimension differs from w_star");
  if (max_attempts_per_sample < 1) throw ValidationError("generator: max_attempts must be >= 1");
}

Dataset generate(const GeneratorSpec& spec, std::size_t n, std::uint64_t seed, GenerationStats* stats) {
  spec.validate();
  const auto k = spec.w_star.size();
  RowMatrix x(static_cast<Eigen::Index>(n), k);
  Vector y(static_cast<Eigen::Index>(n));
  GenerationStats local;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, i));
    bool done = false;
    for (std::size_t attempt = 0; attempt < spec.max_attempts_per_sample; ++attempt) {
      ++local.attempts;
      const Vector xi = draw_covariate(spec.covariates, i, rng);
      if (xi.size() != k) throw ValidationError("generator: custom source returned wrong dimension");
      const double yi = spec.w_star.dot(xi) + standard_normal(rng);
      if (!membership(spec.set, yi)) continue;
      if (spec.covariate_filter && !spec.covariate_filter(xi)) continue;
      x.row(static_cast<Eigen::Index>(i)) = xi.transpose();
      y[static_cast<Eigen::Index>(i)] = yi;
      done = true;
      break;
    }
    if (!done)
      throw NumericError("generator: sample " + std::to_string(i) + " exhausted " +
                         std::to_string(spec.max_attempts_per_sample) + " attempts");
    ++local.accepted;
  }
  if (stats) *stats = local;
  return {std::move(x), std::move(y)};
}

Vector ols(const Dataset& data) {
  if (data.n() == 0) throw ValidationError("ols: empty dataset");
  const Matrix x = data.covariates;
  const Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (qr.rank() < x.cols()) throw NumericError("ols: design matrix is rank deficient");
  return qr.solve(data.responses);
}

std::vector<Sample> relu_forward(const Vector& w_star, const std::vector<Vector>& inputs, Rng& rng) {
  std::vector<Sample> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) {
    if (x.size() != w_star.size()) throw ValidationError("relu_forward: dimension mismatch");
    out.push_back({x, std::max(0.0, w_star.dot(x) + standard_normal(rng))});
  }
  return out;
}

std::pair<Dataset, TruncationSet> relu_reduce(const std::vector<Sample>& pairs) {
  std::vector<Sample> kept;
  for (const auto& s : pairs) {
    if (s.y < 0.0 || std::isnan(s.y)) throw ValidationError("relu_reduce: negative output is not a noisy-ReLU value");
    if (s.y > 0.0) kept.push_back(s);
  }
  if (kept.empty()) throw ValidationError("relu_reduce: every output is censored; nothing to learn from");
  return {Dataset::from_samples(kept), TruncationSet::half_line(0.0)};
}

GeneratorSpec parse_generator(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("generator spec must be a JSON object");
  GeneratorSpec spec;
  try {
    if (j.contains("w_star")) {
      const auto w = j.at("w_star").get<std::vector<double>>();
      spec.w_star = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    } else if (j.contains("k")) {
      spec.w_star = Vector::Constant(j.at("k").get<Eigen::Index>(), j.value("w_star_fill", 1.0));
    } else {
      throw ValidationError("generator spec needs \"w_star\" or \"k\"");
    }
    const auto k = static_cast<std::size_t>(spec.w_star.size());
    GaussianCovariates gauss{k, std::nullopt};
    if (j.contains("covariates")) {
      const auto& c = j.at("covariates");
      if (c.value("type", std::string("gaussian")) != "gaussian")
        throw ValidationError("generator: only gaussian covariates can be described in JSON");
      if (c.contains("clip")) gauss.clip = c.at("clip").get<double>();
    }
    spec.covariates = gauss;
    if (j.contains("set")) spec.set = parse_set(j.at("set"));
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      if (f.value("type", std::string()) != "wstar_dot_below")
        throw ValidationError("generator: unknown filter type");
      const double threshold = f.at("threshold").get<double>();
      spec.covariate_filter = [w = spec.w_star, threshold](const Vector& x) { return w.dot(x) < threshold; };
    }
    if (j.contains("max_attempts")) spec.max_attempts_per_sample = j.at("max_attempts").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("generator spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace trunreg
