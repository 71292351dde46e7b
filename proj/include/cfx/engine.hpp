#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfx/align.hpp"
#include "cfx/prototypes.hpp"
#include "cfx/sparsify.hpp"

namespace cfx {

struct VariantResult {
  std::string name;  // "Original" | "Sparse" | "Aligned Sparse"
  Series series;
  Mask mask;
  ProbVec probs;
  bool valid = false;  // thresholded prediction equals the target vector
  double mask_fraction = 0.0;
};

struct CounterfactualResult {
  std::string query_id;
  int target_class = -1;
  std::string target_name;
  std::string prototype_id;
  LabelVec query_labels;
  ProbVec query_probs;
  std::vector<VariantResult> variants;
  bool aligned_available = false;
  bool aligned_valid = false;
};

// NORM when any pathological class is predicted and NORM is not; otherwise
// the non-predicted class with the highest probability (ties -> lower index).
// Errors when every class is already predicted.
int select_target_class(const ProbVec& probs, const LabelVec& predicted,
                        const std::vector<std::string>& class_names);

// Target-class entry with minimal DTW distance to the query; ties keep the
// earlier entry.
const PrototypeEntry& retrieve_prototype(const PrototypeDB& db, const Series& query, int target,
                                         std::optional<int> band = std::nullopt);

struct ExplainOptions {
  std::optional<int> target;      // class index; default = select_target_class
  std::optional<int> band;        // DTW band for retrieval; default = T/10
  SparsifyConfig sparsify;
  double sampling_rate = 100.0;
};

// Full query-time pipeline. Variants: Original (raw prototype), Sparse
// (sparsified raw prototype), and Aligned Sparse when R-peak alignment is
// possible; alignment failure degrades gracefully to the first two.
CounterfactualResult explain(const Series& query, const Model& model, const PrototypeDB& db,
                             const ExplainOptions& options = {});

// result.json + cf_signals.f32 (variant series in order) inside `dir`.
void save_result(const std::filesystem::path& dir, const CounterfactualResult& result);
CounterfactualResult load_result(const std::filesystem::path& dir);

}  // namespace cfx
