#pragma once

#include <vector>

#include "cfx/series.hpp"

namespace cfx {

struct RPeaks {
  std::vector<int> indices;  // strictly increasing, in [0, T)

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

// Local maxima of one lead above mean + 1.5*std of that lead, thinned by a
// refractory gap of 0.2*sampling_rate samples (larger amplitude wins).
// Zero peaks is a legal outcome.
RPeaks detect_rpeaks(const Series& series, int lead, double sampling_rate = 100.0);

// Lead II (index 1) when present, else lead 0.
int default_rpeak_lead(const Series& series);

// Detection with fallback: if the default lead yields < 2 peaks, retry on
// the lead with the widest peak-to-peak range.
RPeaks detect_rpeaks_auto(const Series& series, double sampling_rate = 100.0);

}  // namespace cfx
