#include "cfx/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfx {

namespace {

double sq_dist(const double* a, const double* b, int dims) {
  double s = 0.0;
  for (int d = 0; d < dims; ++d) {
    double dlt = a[d] - b[d];
    s += dlt * dlt;
  }
  return s;
}

struct KMeansRun {
  std::vector<int> labels;
  std::vector<double> centroids;
  double inertia = std::numeric_limits<double>::infinity();
};

KMeansRun run_once(const Embedding& e, int k, int max_iters, std::mt19937_64& rng) {
  std::size_t n = e.n;
  int dims = e.dims;
  std::vector<double> centroids(static_cast<std::size_t>(k) * dims);

  // k-means++ seeding.
  std::size_t first = rng_index(rng, n);
  std::copy_n(&e.z[first * dims], dims, centroids.begin());
  std::vector<double> best_sq(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = std::numeric_limits<double>::infinity();
      for (int cc = 0; cc < c; ++cc)
        m = std::min(m, sq_dist(&e.z[i * dims], &centroids[static_cast<std::size_t>(cc) * dims], dims));
      best_sq[i] = m;
      total += m;
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng_index(rng, n);
    } else {
      double target = rng_uniform(rng) * total;
      pick = n - 1;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += best_sq[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    std::copy_n(&e.z[pick * dims], dims, centroids.begin() + static_cast<std::ptrdiff_t>(c) * dims);
  }

  std::vector<int> labels(n, -1);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k));
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = sq_dist(&e.z[i * dims], &centroids[static_cast<std::size_t>(c) * dims], dims);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }

    // Repair empty clusters with the point currently farthest from its centroid.
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(labels[i])];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      std::size_t worst = 0;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(labels[i])] <= 1) continue;
        double d = sq_dist(&e.z[i * dims],
                           &centroids[static_cast<std::size_t>(labels[i]) * dims], dims);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      --counts[static_cast<std::size_t>(labels[worst])];
      labels[worst] = c;
      ++counts[static_cast<std::size_t>(c)];
      changed = true;
    }

    std::fill(centroids.begin(), centroids.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double* cen = &centroids[static_cast<std::size_t>(labels[i]) * dims];
      for (int d = 0; d < dims; ++d) cen[d] += e.z[i * dims + d];
    }
    for (int c = 0; c < k; ++c) {
      double* cen = &centroids[static_cast<std::size_t>(c) * dims];
      for (int d = 0; d < dims; ++d) cen[d] /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    if (!changed) break;
  }

  KMeansRun run;
  run.labels = std::move(labels);
  run.centroids = std::move(centroids);
  run.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    run.inertia += sq_dist(&e.z[i * dims],
                           &run.centroids[static_cast<std::size_t>(run.labels[i]) * dims], dims);
  return run;
}

}  // namespace

ClusterAssignment kmeans(const Embedding& embedding, int k, const KMeansConfig& config) {
  if (k < 1) throw CfxError("kmeans: k must be positive");
  if (static_cast<std::size_t>(k) > embedding.n)
    throw CfxError("kmeans: k exceeds the number of points");
  KMeansRun best;
  for (int r = 0; r < std::max(1, config.restarts); ++r) {
    std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(r)));
    KMeansRun run = run_once(embedding, k, config.max_iters, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  ClusterAssignment out;
  out.labels = std::move(best.labels);
  out.k = k;
  out.centroids = std::move(best.centroids);
  out.inertia = best.inertia;
  return out;
}

double silhouette(const Embedding& embedding, const ClusterAssignment& assignment) {
  if (assignment.k < 2) throw CfxError("silhouette: need at least 2 clusters");
  std::size_t n = embedding.n;
  int dims = embedding.dims;
  int k = assignment.k;

  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (int lbl : assignment.labels) ++counts[static_cast<std::size_t>(lbl)];
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0) throw CfxError("silhouette: empty cluster");

  double total = 0.0;
  std::vector<double> mean_to(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(mean_to.begin(), mean_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double d = std::sqrt(sq_dist(&embedding.z[i * dims], &embedding.z[j * dims], dims));
      mean_to[static_cast<std::size_t>(assignment.labels[j])] += d;
    }
    int own = assignment.labels[i];
    std::size_t own_count = counts[static_cast<std::size_t>(own)];
    if (own_count <= 1) continue;  // singleton scores 0
    double a = mean_to[static_cast<std::size_t>(own)] / static_cast<double>(own_count - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own) continue;
      b = std::min(b, mean_to[static_cast<std::size_t>(c)] / static_cast<double>(counts[static_cast<std::size_t>(c)]));
    }
    double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

StructureSelection select_structure(const DistanceMatrix& matrix, std::pair<int, int> dim_range,
                                    std::pair<int, int> k_range, std::uint64_t seed,
                                    const MdsConfig& mds_config,
                                    const KMeansConfig& kmeans_config) {
  if (matrix.n < 3) throw CfxError("select_structure: need at least 3 records");
  int k_lo = k_range.first;
  int k_hi = k_range.second;
  bool truncated = false;
  if (static_cast<std::size_t>(k_hi) >= matrix.n) {
    k_hi = static_cast<int>(matrix.n) - 1;
    truncated = true;
    log_info("select_structure: k range truncated to " + std::to_string(k_hi) +
             " for n=" + std::to_string(matrix.n));
  }
  if (k_lo > k_hi) k_lo = k_hi;
  if (k_lo < 2) throw CfxError("select_structure: k range collapsed below 2");

  StructureSelection best;
  best.silhouette = -std::numeric_limits<double>::infinity();
  best.k_range_truncated = truncated;

  for (int dims = dim_range.first; dims <= dim_range.second; ++dims) {
    MdsConfig mc = mds_config;
    mc.seed = mix_seed(seed, static_cast<std::uint64_t>(dims));
    Embedding emb = mds_embed(matrix, dims, mc);
    for (int k = k_lo; k <= k_hi; ++k) {
      KMeansConfig kc = kmeans_config;
      kc.seed = mix_seed(seed, static_cast<std::uint64_t>(dims) * 1000 + static_cast<std::uint64_t>(k));
      ClusterAssignment asg = kmeans(emb, k, kc);
      double s = silhouette(emb, asg);
      log_debug("select_structure: dims=" + std::to_string(dims) + " k=" + std::to_string(k) +
                " silhouette=" + std::to_string(s));
      if (s > best.silhouette) {
        best.dims = dims;
        best.k = k;
        best.embedding = emb;
        best.assignment = std::move(asg);
        best.silhouette = s;
      }
    }
  }
  return best;
}

std::size_t medoid(const std::vector<std::size_t>& member_rows, const DistanceMatrix& matrix) {
  if (member_rows.empty()) throw CfxError("medoid: empty cluster");
  for (std::size_t r : member_rows)
    if (r >= matrix.n) throw CfxError("medoid: row index out of range");
  std::vector<std::size_t> rows = member_rows;
  std::sort(rows.begin(), rows.end());  // strict < scan then ties at lowest index
  std::size_t best = rows.front();
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t r : rows) {
    double sum = 0.0;
    for (std::size_t o : rows) sum += matrix.at(r, o);
    if (sum < best_sum) {
      best_sum = sum;
      best = r;
    }
  }
  return best;
}

std::string medoid(const std::vector<std::string>& member_ids, const DistanceMatrix& matrix) {
  std::vector<std::size_t> rows;
  rows.reserve(member_ids.size());
  for (const std::string& id : member_ids) {
    int idx = matrix.index_of(id);
    if (idx < 0) throw CfxError("medoid: id " + id + " not present in matrix");
    rows.push_back(static_cast<std::size_t>(idx));
  }
  return matrix.ids[medoid(rows, matrix)];
}

}  // namespace cfx
