#pragma once

#include "trunreg/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace trunreg {

struct Sample {
  Vector x;
  double y;
};

/// Samples that survived truncation. Row i of `covariates` is x^(i).
/// `scale` is the factor already applied to the covariates (1 if untouched).
struct Dataset {
  RowMatrix covariates;
  Vector responses;
  double scale = 1.0;

  Dataset() = default;
  Dataset(RowMatrix x, Vector y, double scale = 1.0);
  static Dataset from_samples(const std::vector<Sample>& samples);

  std::size_t n() const { return static_cast<std::size_t>(responses.size()); }
  std::size_t k() const { return static_cast<std::size_t>(covariates.cols()); }
  Sample sample(std::size_t i) const { return {covariates.row(static_cast<Eigen::Index>(i)).transpose(), responses[static_cast<Eigen::Index>(i)]}; }
};

/// CSV with header x1,...,xk,y; values written with 17 significant digits.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::string& path);

}  // namespace trunreg
