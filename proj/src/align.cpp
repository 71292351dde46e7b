#include "cfx/align.hpp"

#include <algorithm>
#include <cmath>

namespace cfx {

namespace {

// Linear resampling of src time range [a0,a1] onto dst range [b0,b1], both
// inclusive, across all channels. Equal spans degenerate to an exact sample
// copy (frac is identically zero), which keeps self-alignment bit-exact.
void resample_segment(const Series& src, int a0, int a1, Series& dst, int b0, int b1) {
  if (b1 < b0) return;
  int c = src.c;
  if (a1 <= a0 || b1 == b0) {
    int a = std::clamp(a0, 0, src.t - 1);
    if (a1 <= a0) {
      for (int t = b0; t <= b1; ++t)
        for (int ch = 0; ch < c; ++ch) dst.at(t, ch) = src.at(a, ch);
    } else {
      for (int ch = 0; ch < c; ++ch) dst.at(b0, ch) = src.at(a, ch);
    }
    return;
  }
  double ratio = static_cast<double>(a1 - a0) / static_cast<double>(b1 - b0);
  for (int t = b0; t <= b1; ++t) {
    double pos = a0 + (t - b0) * ratio;
    int i = static_cast<int>(std::floor(pos));
    double frac = pos - i;
    if (i >= src.t - 1) {
      i = src.t - 1;
      frac = 0.0;
    }
    for (int ch = 0; ch < c; ++ch) {
      if (frac == 0.0)
        dst.at(t, ch) = src.at(i, ch);
      else
        dst.at(t, ch) = static_cast<float>((1.0 - frac) * src.at(i, ch) + frac * src.at(i + 1, ch));
    }
  }
}

}  // namespace

std::pair<Series, RPeaks> normalize_peak_count(const Series& proto, const RPeaks& proto_peaks,
                                               const RPeaks& query_peaks) {
  if (query_peaks.empty()) throw CfxError("normalize_peak_count: query has no peaks");
  if (proto_peaks.empty())
    throw AlignmentUnavailable("normalize_peak_count: prototype has no detectable R-peaks");

  auto p = static_cast<int>(proto_peaks.size());
  auto q = static_cast<int>(query_peaks.size());
  if (p == q) return {proto, proto_peaks};

  if (p > q) {
    // Drop the leading surplus beats; cut at the midpoint before the first
    // kept peak so it stays an interior sample.
    int cut = p - q;
    int t0 = (proto_peaks.indices[cut - 1] + proto_peaks.indices[cut] + 1) / 2;
    Series out(proto.record_id, proto.t - t0, proto.c);
    std::copy(proto.values.begin() + static_cast<std::ptrdiff_t>(t0) * proto.c,
              proto.values.end(), out.values.begin());
    RPeaks peaks;
    for (int k = cut; k < p; ++k) peaks.indices.push_back(proto_peaks.indices[k] - t0);
    return {std::move(out), std::move(peaks)};
  }

  // Fewer prototype beats: prepend zeros so the first prototype peak meets
  // the first matched query peak, then right-crop back to T.
  int z = query_peaks.indices[static_cast<std::size_t>(q - p)] - proto_peaks.indices.front();
  z = std::clamp(z, 0, proto.t - 1 - proto_peaks.indices.back());
  Series out(proto.record_id, proto.t, proto.c);
  for (int t = z; t < proto.t; ++t)
    for (int ch = 0; ch < proto.c; ++ch) out.at(t, ch) = proto.at(t - z, ch);
  RPeaks peaks;
  for (int idx : proto_peaks.indices) peaks.indices.push_back(idx + z);
  return {std::move(out), std::move(peaks)};
}

Series align_prototype(const Series& proto, const RPeaks& proto_peaks, const Series& query,
                       const RPeaks& query_peaks) {
  if (proto.c != query.c) throw CfxError("align_prototype: channel mismatch");
  if (query_peaks.empty())
    throw AlignmentUnavailable("align_prototype: query has no detectable R-peaks");

  auto [prot, peaks] = normalize_peak_count(proto, proto_peaks, query_peaks);
  auto m = static_cast<int>(std::min(peaks.size(), query_peaks.size()));
  const std::vector<int>& sp = peaks.indices;
  const std::vector<int>& qp = query_peaks.indices;
  int s_off = static_cast<int>(peaks.size()) - m;
  int q_off = static_cast<int>(query_peaks.size()) - m;

  Series out(proto.record_id, query.t, query.c);
  resample_segment(prot, 0, sp[s_off], out, 0, qp[q_off]);
  for (int k = 0; k + 1 < m; ++k)
    resample_segment(prot, sp[s_off + k], sp[s_off + k + 1], out, qp[q_off + k], qp[q_off + k + 1]);
  resample_segment(prot, sp[s_off + m - 1], prot.t - 1, out, qp[q_off + m - 1], query.t - 1);
  return out;
}

Series align_prototype(const Series& proto, const Series& query) {
  return align_prototype(proto, detect_rpeaks_auto(proto), query, detect_rpeaks_auto(query));
}

}  // namespace cfx
