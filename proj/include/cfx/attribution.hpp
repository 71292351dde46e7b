#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfx/classifier.hpp"

namespace cfx {

struct AttributionTensor {
  int n_records = 0;
  int n_classes = 0;
  int n_timesteps = 0;
  int n_channels = 0;
  std::string provenance;
  std::vector<float> values;  // [record][class][time][channel]

  std::size_t slice_size() const {
    return static_cast<std::size_t>(n_timesteps) * static_cast<std::size_t>(n_channels);
  }
  // One [T][C] plane for a (record, class) pair.
  std::span<const float> slice(int record, int cls) const;
};

// attr.f32 + attr_manifest.json; `path` may be the directory or the .f32 file.
AttributionTensor load_attribution(const std::filesystem::path& path);
void write_attribution(const std::filesystem::path& dir, const AttributionTensor& attr);

struct RuleConfig {
  double percentile = 90.0;
  int n_perturb = 1000;
  double perturb_scale = 1.0;
  enum class Kind { Uniform, Gaussian };
  Kind perturb_kind = Kind::Uniform;
  std::uint64_t seed = 42;
};

struct RuleConjunct {
  int time = 0;
  int channel = 0;
  double low = 0.0;   // value must satisfy low < v <= high
  double high = 0.0;
};

struct IntervalRule {
  std::string record_id;
  int class_index = 0;
  std::vector<RuleConjunct> conjuncts;
  double coverage = 0.0;
  double confidence = 0.0;
  LabelVec source_labels;  // the model's prediction on the source record
  bool degenerate = false;  // some feature had no label-preserving draw
};

// Percentile (linear interpolation, rank = 1 + p/100*(n-1)) of |values|
// pooled over the whole tensor.
double global_threshold(const AttributionTensor& attr, double percentile);

// Coordinates with |value| >= threshold, in row-major (time, channel) order.
std::vector<std::pair<int, int>> important_features(std::span<const float> attr_slice, int t,
                                                    int c, double threshold);

// Precomputed inputs shared by every rule extracted from one tensor/dataset.
struct RuleInputs {
  double threshold = 0.0;
  std::vector<double> sigma_f;  // per (t,c) population std over the dataset
};
RuleInputs make_rule_inputs(const AttributionTensor& attr, const Dataset& dataset,
                            const RuleConfig& config);

// M joint perturbations of the important coordinates; per feature, the
// tightest (low, high] covering the label-preserving draws plus the original
// value. Features whose every draw flips the labels collapse to a point
// interval (flagged through the bool).
std::vector<RuleConjunct> stable_intervals(const Model& model, const Series& series,
                                           const std::vector<std::pair<int, int>>& features,
                                           const std::vector<double>& sigma_f,
                                           const RuleConfig& config, bool* degenerate = nullptr);

class EmptyRuleError : public CfxError {
 public:
  explicit EmptyRuleError(const std::string& what) : CfxError(what) {}
};

// threshold -> features -> intervals -> scoring, for one (record, class).
IntervalRule extract_rule(const Model& model, const Series& series,
                          std::span<const float> attr_slice, const RuleInputs& inputs,
                          const Dataset& dataset, int class_index, const RuleConfig& config);

// coverage = fraction of records inside every conjunct; confidence = among
// those, fraction predicted exactly as the rule's source labels.
std::pair<double, double> score_rule(const IntervalRule& rule, const Dataset& dataset,
                                     const Model& model);

// Built-in attribution substitute: per class, probability drop when a
// centered window on one channel is replaced by that channel's mean.
std::vector<float> occlusion_attribution(const Model& model, const Series& series, int window);

void write_rules_jsonl(const std::filesystem::path& path, const std::vector<IntervalRule>& rules);
std::vector<IntervalRule> load_rules_jsonl(const std::filesystem::path& path);

}  // namespace cfx
