#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/cluster.hpp"

namespace cfx {

struct MiningConfig {
  std::optional<int> band;  // DTW half-width; defaults to T/10 when unset
  int dim_min = 2;
  int dim_max = 8;
  int k_min = 2;
  int k_max = 10;
  std::uint64_t seed = 42;
  int kmeans_restarts = 20;
};

struct PrototypeEntry {
  int class_index = 0;
  int cluster_index = 0;
  std::string record_id;
  Series series;
  double mean_intra_dtw = 0.0;
};

struct ClassMiningStats {
  int class_index = 0;
  int n_filtered = 0;
  int dims = 0;
  int k = 0;
  double silhouette = 0.0;
  bool passthrough = false;   // class had < 3 usable records
  bool k_truncated = false;
};

struct PrototypeDB {
  std::vector<std::string> class_names;
  std::vector<PrototypeEntry> entries;
  std::vector<ClassMiningStats> stats;
  MiningConfig config;
  int n_timesteps = 0;
  int n_channels = 0;

  std::vector<const PrototypeEntry*> entries_for_class(int class_index) const;
};

// Per-class lists of dataset record indices: a record survives for class l
// iff its ground truth is single-label {l} and the model's thresholded
// prediction reproduces that exact vector.
std::vector<std::vector<std::size_t>> filter_samples(const Dataset& dataset, const Model& model);

// Full offline pipeline: filter -> per-class DTW matrix -> structure sweep ->
// per-cluster medoids. Classes with < 3 survivors pass their records through
// as prototypes (flagged); classes with none are omitted (flagged).
PrototypeDB mine_prototypes(const Dataset& dataset, const Model& model,
                            const MiningConfig& config = {});

// Directory layout: prototypes.json + proto_signals.f32 (row-major
// [entry][time][channel], same encoding as dataset signals).
void save_prototype_db(const std::filesystem::path& dir, const PrototypeDB& db);
PrototypeDB load_prototype_db(const std::filesystem::path& dir);

}  // namespace cfx
