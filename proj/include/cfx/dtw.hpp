#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfx/series.hpp"

namespace cfx {

// Multivariate DTW: minimum over monotone boundary-anchored unit-step
// warping paths of the summed per-cell Euclidean channel distance.
// `band` is a Sakoe-Chiba half-width (|i-j| <= band); it must be at least
// |T_a - T_b| or the end cell is unreachable.
double dtw_distance(const Series& a, const Series& b, std::optional<int> band = std::nullopt);

struct DistanceMatrix {
  std::vector<std::string> ids;
  std::vector<double> d;  // n*n, symmetric, zero diagonal
  std::size_t n = 0;

  double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }
  int index_of(const std::string& id) const;  // -1 when absent
};

// Computes each unordered pair once (in parallel) and mirrors it.
DistanceMatrix distance_matrix(const std::vector<const Series*>& records,
                               std::optional<int> band = std::nullopt);
DistanceMatrix distance_matrix(const std::vector<Series>& records,
                               std::optional<int> band = std::nullopt);

}  // namespace cfx
