#include "cfx/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfx {

void validate_series(const Series& s) {
  if (s.t < 2) throw CfxError("series " + s.record_id + ": need at least 2 time steps");
  if (s.c < 1) throw CfxError("series " + s.record_id + ": need at least 1 channel");
  if (s.values.size() != static_cast<std::size_t>(s.t) * static_cast<std::size_t>(s.c))
    throw CfxError("series " + s.record_id + ": value buffer does not match T*C");
  for (float v : s.values)
    if (!std::isfinite(v)) throw CfxError("series " + s.record_id + ": non-finite value");
}

bool LabelVec::any() const {
  return std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

std::size_t LabelVec::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(),
                                                [](std::uint8_t b) { return b != 0; }));
}

std::optional<std::size_t> Dataset::find_record(const std::string& record_id) const {
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].record_id == record_id) return i;
  return std::nullopt;
}

int Dataset::class_index(const std::string& name) const {
  for (std::size_t i = 0; i < class_names.size(); ++i)
    if (class_names[i] == name) return static_cast<int>(i);
  return -1;
}

void validate_dataset(const Dataset& d) {
  if (d.records.empty()) throw CfxError("dataset has no records");
  if (d.class_names.empty()) throw CfxError("dataset has no classes");
  if (d.labels.size() != d.records.size())
    throw CfxError("dataset: label rows do not match record count");
  int t = d.records.front().t;
  int c = d.records.front().c;
  for (const Series& s : d.records) {
    validate_series(s);
    if (s.t != t || s.c != c)
      throw CfxError("dataset: record " + s.record_id + " shape differs from the rest");
  }
  for (const LabelVec& lv : d.labels)
    if (lv.size() != d.class_names.size())
      throw CfxError("dataset: label vector width does not match class list");
}

NormStats zscore_stats(const Dataset& d) {
  if (d.records.empty()) throw CfxError("zscore_stats: empty dataset");
  double sum = 0.0;
  std::size_t n = 0;
  for (const Series& s : d.records) {
    for (float v : s.values) sum += v;
    n += s.values.size();
  }
  double mu = sum / static_cast<double>(n);
  double sq = 0.0;
  for (const Series& s : d.records)
    for (float v : s.values) {
      double dlt = v - mu;
      sq += dlt * dlt;
    }
  return NormStats{mu, std::sqrt(sq / static_cast<double>(n))};
}

Series normalize(const Series& s, const NormStats& stats) {
  Series out = s;
  double denom = stats.sigma + kNormEpsilon;
  for (float& v : out.values) v = static_cast<float>((v - stats.mu) / denom);
  return out;
}

Series denormalize(const Series& s, const NormStats& stats) {
  Series out = s;
  double denom = stats.sigma + kNormEpsilon;
  for (float& v : out.values) v = static_cast<float>(v * denom + stats.mu);
  return out;
}

Series shift_series(const Series& s, int tau) {
  if (std::abs(tau) >= s.t)
    throw CfxError("shift_series: |tau| must be smaller than the series length");
  Series out(s.record_id, s.t, s.c);
  for (int t = 0; t < s.t; ++t) {
    int src = std::clamp(t - tau, 0, s.t - 1);
    for (int ch = 0; ch < s.c; ++ch) out.at(t, ch) = s.at(src, ch);
  }
  return out;
}

}  // namespace cfx
