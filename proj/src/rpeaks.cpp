#include "cfx/rpeaks.hpp"

#include <algorithm>
#include <cmath>

namespace cfx {

RPeaks detect_rpeaks(const Series& series, int lead, double sampling_rate) {
  if (series.t < 2) throw CfxError("detect_rpeaks: need at least 2 samples");
  if (lead < 0 || lead >= series.c) throw CfxError("detect_rpeaks: lead index out of range");

  double mean = 0.0;
  for (int t = 0; t < series.t; ++t) mean += series.at(t, lead);
  mean /= series.t;
  double var = 0.0;
  for (int t = 0; t < series.t; ++t) {
    double d = series.at(t, lead) - mean;
    var += d * d;
  }
  double threshold = mean + 1.5 * std::sqrt(var / series.t);

  std::vector<int> candidates;
  for (int t = 1; t + 1 < series.t; ++t) {
    double v = series.at(t, lead);
    if (v > series.at(t - 1, lead) && v >= series.at(t + 1, lead) && v > threshold)
      candidates.push_back(t);
  }

  // Larger amplitude wins inside the refractory window.
  int gap = std::max(1, static_cast<int>(std::lround(0.2 * sampling_rate)));
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    double va = series.at(a, lead), vb = series.at(b, lead);
    if (va != vb) return va > vb;
    return a < b;
  });
  std::vector<int> kept;
  for (int t : candidates) {
    bool blocked = false;
    for (int k : kept)
      if (std::abs(k - t) < gap) {
        blocked = true;
        break;
      }
    if (!blocked) kept.push_back(t);
  }
  std::sort(kept.begin(), kept.end());

  RPeaks out;
  out.indices = std::move(kept);
  return out;
}

int default_rpeak_lead(const Series& series) { return series.c >= 2 ? 1 : 0; }

RPeaks detect_rpeaks_auto(const Series& series, double sampling_rate) {
  RPeaks peaks = detect_rpeaks(series, default_rpeak_lead(series), sampling_rate);
  if (peaks.size() >= 2) return peaks;

  int best_lead = default_rpeak_lead(series);
  double best_range = -1.0;
  for (int c = 0; c < series.c; ++c) {
    double mn = series.at(0, c), mx = series.at(0, c);
    for (int t = 1; t < series.t; ++t) {
      mn = std::min(mn, static_cast<double>(series.at(t, c)));
      mx = std::max(mx, static_cast<double>(series.at(t, c)));
    }
    if (mx - mn > best_range) {
      best_range = mx - mn;
      best_lead = c;
    }
  }
  RPeaks retry = detect_rpeaks(series, best_lead, sampling_rate);
  return retry.size() > peaks.size() ? retry : peaks;
}

}  // namespace cfx
