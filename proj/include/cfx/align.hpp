#pragma once

#include <utility>

#include "cfx/rpeaks.hpp"

namespace cfx {

// Raised when the prototype cannot be beat-aligned (e.g. no detectable
// R-peaks); the engine catches it and degrades to the unaligned variants.
class AlignmentUnavailable : public CfxError {
 public:
  explicit AlignmentUnavailable(const std::string& what) : CfxError(what) {}
};

// Makes the prototype's beat count usable against the query's: equal counts
// pass through; surplus leading prototype beats are trimmed away (cut at the
// midpoint before the first kept peak); missing beats are compensated by
// prepending zeros (grown axis right-cropped to T). Peak indices are
// re-based onto the returned series.
std::pair<Series, RPeaks> normalize_peak_count(const Series& proto, const RPeaks& proto_peaks,
                                               const RPeaks& query_peaks);

// Piecewise-linear resampling of the prototype onto the query's beat grid:
// each consecutive matched peak pair maps one prototype segment onto the
// corresponding query segment; the regions before the first and after the
// last matched peak are resampled the same way. Output shape = query shape,
// and matched prototype peaks land exactly on query peak indices.
Series align_prototype(const Series& proto, const RPeaks& proto_peaks, const Series& query,
                       const RPeaks& query_peaks);

// Convenience overload that detects peaks on both series.
Series align_prototype(const Series& proto, const Series& query);

}  // namespace cfx
