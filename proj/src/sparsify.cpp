#include "cfx/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfx {

std::size_t Mask::ones() const {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

double Mask::fraction() const {
  return m.empty() ? 0.0 : static_cast<double>(ones()) / static_cast<double>(m.size());
}

namespace {

void check_config(const SparsifyConfig& cfg) {
  if (!(cfg.initial_keep_ratio > 0.0 && cfg.initial_keep_ratio <= cfg.max_keep_ratio &&
        cfg.max_keep_ratio <= 1.0))
    throw CfxError("sparsify: need 0 < initial_keep_ratio <= max_keep_ratio <= 1");
  if (!(cfg.keep_ratio_step > 0.0)) throw CfxError("sparsify: keep_ratio_step must be positive");
  if (cfg.min_segment_len < 1) throw CfxError("sparsify: min_segment_len must be >= 1");
}

void check_shapes(const Series& query, const Series& donor) {
  if (query.t != donor.t || query.c != donor.c)
    throw CfxError("sparsify: query and donor shapes differ");
}

SparsifyResult run_schedule(const Series& query, const Series& donor, const Model& model,
                            const LabelVec& target, const SparsifyConfig& config,
                            const std::vector<double>& scores) {
  SparsifyResult res;
  double ratio = config.initial_keep_ratio;
  for (;;) {
    Mask mask = clean_segments(mask_top_fraction(scores, query.t, query.c, ratio),
                               config.min_segment_len);
    Series candidate = compose(query, donor, mask);
    bool ok = model.predict(candidate) == target;
    if (ok || ratio >= config.max_keep_ratio) {
      res.mask = std::move(mask);
      res.series = std::move(candidate);
      res.attained = ok;
      res.keep_ratio = ratio;
      return res;
    }
    ratio = std::min(ratio + config.keep_ratio_step, config.max_keep_ratio);
  }
}

}  // namespace

std::vector<double> importance_scores(const Series& query, const Series& donor,
                                      const RPeaks& query_peaks, const SparsifyConfig& config) {
  check_shapes(query, donor);
  std::vector<double> scores(query.values.size());
  std::vector<std::uint8_t> near_peak(static_cast<std::size_t>(query.t), 0);
  for (int p : query_peaks.indices) {
    int lo = std::max(0, p - config.rpeak_halfwidth);
    int hi = std::min(query.t - 1, p + config.rpeak_halfwidth);
    for (int t = lo; t <= hi; ++t) near_peak[static_cast<std::size_t>(t)] = 1;
  }
  for (int t = 0; t < query.t; ++t) {
    double w = near_peak[static_cast<std::size_t>(t)] ? config.rpeak_weight : 1.0;
    for (int c = 0; c < query.c; ++c) {
      std::size_t i = static_cast<std::size_t>(t) * query.c + c;
      scores[i] = w * std::abs(static_cast<double>(donor.values[i]) - query.values[i]);
    }
  }
  return scores;
}

Mask mask_top_fraction(const std::vector<double>& scores, int t, int c, double keep_ratio) {
  std::size_t total = static_cast<std::size_t>(t) * static_cast<std::size_t>(c);
  if (scores.size() != total) throw CfxError("mask_top_fraction: score size mismatch");
  auto k = static_cast<std::size_t>(std::llround(keep_ratio * static_cast<double>(total)));
  k = std::clamp<std::size_t>(k, 1, total);

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  Mask mask(t, c);
  for (std::size_t i = 0; i < k; ++i) mask.m[order[i]] = 1;
  return mask;
}

Mask clean_segments(const Mask& mask, int min_len) {
  if (min_len < 1) throw CfxError("clean_segments: min_len must be >= 1");
  Mask out = mask;
  for (int c = 0; c < mask.c; ++c) {
    int run_start = -1;
    for (int t = 0; t <= mask.t; ++t) {
      bool on = t < mask.t && mask.at(t, c);
      if (on && run_start < 0) run_start = t;
      if (!on && run_start >= 0) {
        if (t - run_start < min_len)
          for (int i = run_start; i < t; ++i) out.set(i, c, false);
        run_start = -1;
      }
    }
  }
  return out;
}

Series compose(const Series& query, const Series& donor, const Mask& mask) {
  check_shapes(query, donor);
  if (mask.t != query.t || mask.c != query.c) throw CfxError("compose: mask shape mismatch");
  Series out = query;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (mask.m[i]) out.values[i] = donor.values[i];
  return out;
}

SparsifyResult sparsify(const Series& query, const Series& donor, const Model& model,
                        const LabelVec& target, const SparsifyConfig& config) {
  check_config(config);
  check_shapes(query, donor);
  if (!(model.predict(donor) == target))
    throw CfxError("sparsify: donor is not classified as the target");
  std::vector<double> scores =
      importance_scores(query, donor, detect_rpeaks_auto(query), config);
  return run_schedule(query, donor, model, target, config, scores);
}

SparsifyResult sparsify_best_effort(const Series& query, const Series& donor, const Model& model,
                                    const LabelVec& target, const SparsifyConfig& config) {
  check_config(config);
  check_shapes(query, donor);
  std::vector<double> scores =
      importance_scores(query, donor, detect_rpeaks_auto(query), config);
  return run_schedule(query, donor, model, target, config, scores);
}

}  // namespace cfx
