#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfx/classifier.hpp"

namespace cfx {

struct NoiseLevels {
  std::vector<double> fractions = {0.01, 0.02, 0.05};  // of std(x_cf)
  int n_trials = 20;
};

struct ShiftSet {
  std::vector<int> shifts = {-2, -1, 1, 2};
};

// 1 iff f(x_cf) == target and f(x_cf) != f(x), on thresholded label vectors.
int validity(const Model& model, const Series& x, const Series& x_cf, const LabelVec& target);

// 1 iff the full thresholded vector equals target.
int validity_multi(const Model& model, const Series& x_cf, const LabelVec& target);

// Fraction of coordinates with |x_cf - x| > 0.01 * sigma_train.
double sparsity_ratio(const Series& x, const Series& x_cf, double sigma_train);

struct LpSparsity {
  double l0 = 0.0;  // fraction of strictly differing coordinates
  double l1 = 0.0;
  double l2 = 0.0;
};
LpSparsity lp_sparsity(const Series& x, const Series& x_cf);

// Fraction of noisy copies (i.i.d. Gaussian, std = fraction * std(x_cf))
// whose prediction matches f(x_cf), averaged over levels and trials.
double noise_stability(const Model& model, const Series& x_cf, const NoiseLevels& levels = {},
                       std::uint64_t seed = 0);

// 1 / (1 + mean_tau DTW(x_cf, shift(x_cf, tau)) / sqrt(T*C)).
double temporal_stability(const Series& x_cf, const ShiftSet& shifts = {},
                          std::optional<int> band = std::nullopt);

// probs[cls] - thresholds[cls], for the counterfactual's target class.
double decision_margin(const ProbVec& probs, const ModelThresholds& thresholds, int cls);

struct QWeights {
  double w_v = 0.0;
  double w_s = 0.0;
  double w_st = 0.0;
  double w_m = 0.0;
};

struct MetricsEntry {
  std::string query_id;
  std::string initial_class;  // predicted classes of the query, ';'-joined
  std::string target_class;
  std::string variant;
  int validity = 0;
  int validity_multi = 0;
  double sparsity_ratio = 0.0;
  double l0 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double noise_stability = 0.0;
  double temporal_stability = 0.0;
  double decision_margin = 0.0;
  std::optional<double> q;
};

// Q = w_v*validity + w_s*(1-sparsity_ratio) + w_st*noise_stability + w_m*margin.
double composite_quality(const MetricsEntry& entry, const QWeights& weights);

enum class GroupKey { InitialClass, TargetClass, Variant };

struct AggregateRow {
  std::string initial_class;  // empty when not grouped on
  std::string target_class;
  std::string variant;
  std::size_t n = 0;
  double validity = 0.0;
  double validity_multi = 0.0;
  double sparsity_ratio = 0.0;
  double l0 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double noise_stability = 0.0;
  double temporal_stability = 0.0;
  double decision_margin = 0.0;
  std::optional<double> q;
};

// Per-group means; groups ordered by first appearance of their key.
std::vector<AggregateRow> aggregate_report(const std::vector<MetricsEntry>& entries,
                                           const std::vector<GroupKey>& group_by);

// Exact header:
// query_id,initial_class,target_class,variant,validity,validity_multi,
// sparsity_ratio,l0,l1,l2,noise_stability,temporal_stability,decision_margin,q
std::string report_csv(const std::vector<MetricsEntry>& entries);
std::string aggregate_csv(const std::vector<AggregateRow>& rows,
                          const std::vector<GroupKey>& group_by);

}  // namespace cfx
