#include "trunreg/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace trunreg {

namespace {

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

Dataset::Dataset(RowMatrix x, Vector y, double scale_)
    : covariates(std::move(x)), responses(std::move(y)), scale(scale_) {
  if (covariates.rows() != responses.size()) throw ValidationError("dataset: covariate rows != responses");
}

Dataset Dataset::from_samples(const std::vector<Sample>& samples) {
  if (samples.empty()) return {};
  const auto k = samples.front().x.size();
  RowMatrix x(static_cast<Eigen::Index>(samples.size()), k);
  Vector y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].x.size() != k) throw ValidationError("dataset: samples disagree on dimension");
    x.row(static_cast<Eigen::Index>(i)) = samples[i].x.transpose();
    y[static_cast<Eigen::Index>(i)] = samples[i].y;
  }
  return {std::move(x), std::move(y)};
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t c = 0; c < data.k(); ++c) out << 'x' << (c + 1) << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < data.covariates.rows(); ++i) {
    for (Eigen::Index c = 0; c < data.covariates.cols(); ++c) out << format_g17(data.covariates(i, c)) << ',';
    out << format_g17(data.responses[i]) << '\n';
  }
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_csv(out, data);
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("dataset CSV is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "y") throw ValidationError("dataset CSV header must be x1,...,xk,y");
  const std::size_t k = header.size() - 1;
  for (std::size_t c = 0; c < k; ++c)
    if (header[c] != "x" + std::to_string(c + 1)) throw ValidationError("dataset CSV header must be x1,...,xk,y");

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != k + 1) throw ValidationError("dataset CSV row " + std::to_string(rows + 1) + " has wrong arity");
    for (const auto& cell : cells) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError("dataset CSV: cannot parse '" + cell + "'");
      }
    }
    ++rows;
  }
  RowMatrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
  Vector y(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < k; ++c) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = values[i * (k + 1) + c];
    y[static_cast<Eigen::Index>(i)] = values[i * (k + 1) + k];
  }
  return {std::move(x), std::move(y)};
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace trunreg
