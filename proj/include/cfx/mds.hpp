#pragma once

#include <cstdint>
#include <vector>

#include "cfx/dtw.hpp"

namespace cfx {

struct MdsConfig {
  int max_iters = 300;
  double rel_tol = 1e-6;  // stop when relative stress change drops below this
  std::uint64_t seed = 0;  // reserved; the start is fully deterministic already
};

struct Embedding {
  std::size_t n = 0;
  int dims = 0;
  std::vector<double> z;  // n x dims, row-major
  double stress = 0.0;    // final raw stress sum (||z_i-z_j|| - D_ij)^2 over i<j
  std::vector<double> stress_history;

  double at(std::size_t i, int d) const { return z[i * dims + d]; }
};

// Metric MDS: classical-scaling start, then iterative stress majorization
// (Guttman transform). Stress never increases across iterations.
Embedding mds_embed(const DistanceMatrix& matrix, int dims, const MdsConfig& config = {});

}  // namespace cfx
