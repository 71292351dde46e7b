#pragma once

#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/rpeaks.hpp"

namespace cfx {

struct Mask {
  int t = 0;
  int c = 0;
  std::vector<std::uint8_t> m;  // T*C, row-major

  Mask() = default;
  Mask(int t_steps, int channels)
      : t(t_steps), c(channels), m(static_cast<std::size_t>(t_steps) * channels, 0) {}

  bool at(int time, int channel) const { return m[static_cast<std::size_t>(time) * c + channel] != 0; }
  void set(int time, int channel, bool v) { m[static_cast<std::size_t>(time) * c + channel] = v ? 1 : 0; }
  std::size_t ones() const;
  double fraction() const;

  friend bool operator==(const Mask& a, const Mask& b) = default;
};

struct SparsifyConfig {
  double initial_keep_ratio = 0.10;
  double keep_ratio_step = 0.05;
  double max_keep_ratio = 1.0;
  int min_segment_len = 10;
  double rpeak_weight = 2.0;
  int rpeak_halfwidth = 5;
};

// score(t,c) = |donor - query|, boosted by rpeak_weight for t within
// +-rpeak_halfwidth of any query peak.
std::vector<double> importance_scores(const Series& query, const Series& donor,
                                      const RPeaks& query_peaks, const SparsifyConfig& config);

// Top keep_ratio fraction of coordinates by score (at least one); ties break
// by flat index.
Mask mask_top_fraction(const std::vector<double>& scores, int t, int c, double keep_ratio);

// Per channel, zeroes every maximal run of 1s shorter than min_len. Idempotent.
Mask clean_segments(const Mask& mask, int min_len);

struct SparsifyResult {
  Mask mask;
  Series series;
  bool attained = false;   // thresholded prediction equals the target
  double keep_ratio = 0.0;  // ratio at which the loop stopped
};

// Iterates the keep ratio from initial by step, building segment-cleaned
// top-score masks and compositing query/donor, until the candidate is
// classified as target. The donor must itself be classified as target, which
// guarantees termination at ratio 1 (mask = all ones, candidate = donor).
SparsifyResult sparsify(const Series& query, const Series& donor, const Model& model,
                        const LabelVec& target, const SparsifyConfig& config = {});

// Same loop without the donor precondition: runs the schedule to the end and
// reports attained=false when no ratio reaches the target (candidate is then
// the full donor).
SparsifyResult sparsify_best_effort(const Series& query, const Series& donor, const Model& model,
                                    const LabelVec& target, const SparsifyConfig& config = {});

// candidate = query where mask=0, donor where mask=1 (exact element select).
Series compose(const Series& query, const Series& donor, const Mask& mask);

}  // namespace cfx
