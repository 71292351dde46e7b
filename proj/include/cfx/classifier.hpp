#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "cfx/series.hpp"

namespace cfx {

// Independent per-class probabilities; multi-label, so no sum-to-1 constraint.
using ProbVec = std::vector<double>;

struct ModelThresholds {
  std::vector<double> t;  // each in (0,1)

  std::size_t size() const { return t.size(); }
};

// bit_i = 1 iff probs_i > t_i (strict). Throws on length mismatch.
LabelVec predict_labels(const ProbVec& probs, const ModelThresholds& thresholds);

struct ThresholdSelection {
  ModelThresholds thresholds;
  // Classes that had no positive label anywhere; their threshold is the 0.5
  // fallback rather than an F1 maximizer.
  std::vector<std::uint8_t> fallback_flags;
};

// Per class: sweep the 0.001..0.999 grid (step 0.001) and keep the smallest
// threshold attaining the maximum binary F1 over the provided records.
ThresholdSelection select_thresholds(const std::vector<ProbVec>& probs_per_record,
                                     const std::vector<LabelVec>& labels);

// Classifier abstraction every downstream module consumes. predict_proba
// must be deterministic for fixed model state.
class Model {
 public:
  virtual ~Model() = default;

  ProbVec predict_proba(const Series& s) const;

  // Expected input shape; -1 means any size is accepted on that axis.
  virtual int expected_timesteps() const = 0;
  virtual int expected_channels() const = 0;
  virtual const std::vector<std::string>& class_names() const = 0;

  std::size_t num_classes() const { return class_names().size(); }
  const ModelThresholds& thresholds() const { return thresholds_; }
  void set_thresholds(ModelThresholds th);

  LabelVec predict(const Series& s) const { return predict_labels(predict_proba(s), thresholds_); }

 protected:
  virtual ProbVec compute_proba(const Series& s) const = 0;
  ModelThresholds thresholds_;
};

struct ReferenceConfig {
  std::uint64_t seed = 42;  // kept for interface stability; training is closed-form deterministic
  int epochs = 400;
  double learning_rate = 0.5;
  double l2 = 1e-4;
};

// Shallow deterministic multi-label classifier: one-vs-rest logistic
// regression over standardized per-channel summary features (mean, std,
// min, max, mean absolute first difference).
class ReferenceClassifier : public Model {
 public:
  int expected_timesteps() const override { return t_; }
  int expected_channels() const override { return c_; }
  const std::vector<std::string>& class_names() const override { return classes_; }

  void save(const std::filesystem::path& path) const;
  static std::unique_ptr<ReferenceClassifier> load(const std::filesystem::path& path);

  std::vector<double> features(const Series& s) const;  // raw, unstandardized

  friend std::unique_ptr<ReferenceClassifier> fit_reference_classifier(const Dataset& d,
                                                                       const ReferenceConfig& cfg);

 protected:
  ProbVec compute_proba(const Series& s) const override;

 private:
  std::vector<std::string> classes_;
  int t_ = 0;
  int c_ = 0;
  std::vector<double> feat_mu_;
  std::vector<double> feat_sd_;
  std::vector<std::vector<double>> weights_;  // per class: F coefficients + bias
  ReferenceConfig config_;
};

// Trains the reference classifier and calibrates its thresholds on the
// training set. Errors when some class has no positive example.
std::unique_ptr<ReferenceClassifier> fit_reference_classifier(const Dataset& d,
                                                              const ReferenceConfig& cfg = {});

}  // namespace cfx
