#include "cfx/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfx {

double dtw_distance(const Series& a, const Series& b, std::optional<int> band) {
  if (a.c != b.c)
    throw CfxError("dtw_distance: channel mismatch (" + std::to_string(a.c) + " vs " +
                   std::to_string(b.c) + ")");
  if (a.t < 1 || b.t < 1) throw CfxError("dtw_distance: empty series");
  int ta = a.t, tb = b.t, c = a.c;
  if (band) {
    if (*band < 0) throw CfxError("dtw_distance: negative band");
    if (*band < std::abs(ta - tb))
      throw CfxError("dtw_distance: band " + std::to_string(*band) +
                     " cannot reach the end cell for lengths " + std::to_string(ta) + "/" +
                     std::to_string(tb));
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(static_cast<std::size_t>(tb) + 1, inf);
  std::vector<double> curr(static_cast<std::size_t>(tb) + 1, inf);
  prev[0] = 0.0;

  for (int i = 1; i <= ta; ++i) {
    int jlo = 1, jhi = tb;
    if (band) {
      jlo = std::max(1, i - *band);
      jhi = std::min(tb, i + *band);
    }
    std::fill(curr.begin(), curr.end(), inf);
    const float* row_a = &a.values[static_cast<std::size_t>(i - 1) * c];
    for (int j = jlo; j <= jhi; ++j) {
      const float* row_b = &b.values[static_cast<std::size_t>(j - 1) * c];
      double sq = 0.0;
      for (int ch = 0; ch < c; ++ch) {
        double dlt = static_cast<double>(row_a[ch]) - static_cast<double>(row_b[ch]);
        sq += dlt * dlt;
      }
      double best = std::min({prev[j], curr[j - 1], prev[j - 1]});
      curr[j] = std::sqrt(sq) + best;
    }
    std::swap(prev, curr);
  }
  return prev[static_cast<std::size_t>(tb)];
}

int DistanceMatrix::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return static_cast<int>(i);
  return -1;
}

DistanceMatrix distance_matrix(const std::vector<const Series*>& records,
                               std::optional<int> band) {
  if (records.size() < 2) throw CfxError("distance_matrix: need at least 2 records");
  DistanceMatrix m;
  m.n = records.size();
  m.d.assign(m.n * m.n, 0.0);
  m.ids.reserve(m.n);
  for (const Series* s : records) m.ids.push_back(s->record_id);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(m.n * (m.n - 1) / 2);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = i + 1; j < m.n; ++j) pairs.emplace_back(i, j);

  parallel_for(pairs.size(), [&](std::size_t p) {
    auto [i, j] = pairs[p];
    double dist = dtw_distance(*records[i], *records[j], band);
    m.at(i, j) = dist;
    m.at(j, i) = dist;
  });
  return m;
}

DistanceMatrix distance_matrix(const std::vector<Series>& records, std::optional<int> band) {
  std::vector<const Series*> ptrs;
  ptrs.reserve(records.size());
  for (const Series& s : records) ptrs.push_back(&s);
  return distance_matrix(ptrs, band);
}

}  // namespace cfx
