#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cfx/mds.hpp"

namespace cfx {

struct ClusterAssignment {
  std::vector<int> labels;  // length n, values in [0,k)
  int k = 0;
  std::vector<double> centroids;  // k x dims, row-major
  double inertia = 0.0;
};

struct KMeansConfig {
  int restarts = 20;
  int max_iters = 100;
  std::uint64_t seed = 0;
};

// Seeded k-means++ with `restarts` independent runs; keeps the lowest
// inertia. Empty clusters are repaired by stealing the point farthest from
// its centroid, so every output cluster is non-empty.
ClusterAssignment kmeans(const Embedding& embedding, int k, const KMeansConfig& config = {});

// Mean silhouette over all points (Euclidean distances in embedding space).
// Singletons and all-zero-distance points score 0.
double silhouette(const Embedding& embedding, const ClusterAssignment& assignment);

struct StructureSelection {
  int dims = 0;
  int k = 0;
  Embedding embedding;
  ClusterAssignment assignment;
  double silhouette = 0.0;
  bool k_range_truncated = false;
};

// Sweeps dims x k, embedding once per dims and clustering per k; returns the
// silhouette argmax with ties broken by smaller dims, then smaller k.
// k_range is truncated to n-1 (flagged) when the matrix is small.
StructureSelection select_structure(const DistanceMatrix& matrix,
                                    std::pair<int, int> dim_range = {2, 8},
                                    std::pair<int, int> k_range = {2, 10},
                                    std::uint64_t seed = 0,
                                    const MdsConfig& mds_config = {},
                                    const KMeansConfig& kmeans_config = {});

// Member of the cluster minimizing the summed distance to all members;
// ties go to the lowest index.
std::size_t medoid(const std::vector<std::size_t>& member_rows, const DistanceMatrix& matrix);
std::string medoid(const std::vector<std::string>& member_ids, const DistanceMatrix& matrix);

}  // namespace cfx
