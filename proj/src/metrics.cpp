#include "cfx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cfx/dtw.hpp"

namespace cfx {

int validity(const Model& model, const Series& x, const Series& x_cf, const LabelVec& target) {
  LabelVec before = model.predict(x);
  LabelVec after = model.predict(x_cf);
  return (after == target && !(after == before)) ? 1 : 0;
}

int validity_multi(const Model& model, const Series& x_cf, const LabelVec& target) {
  return model.predict(x_cf) == target ? 1 : 0;
}

double sparsity_ratio(const Series& x, const Series& x_cf, double sigma_train) {
  if (x.values.size() != x_cf.values.size()) throw CfxError("sparsity_ratio: shape mismatch");
  if (sigma_train < 0.0) throw CfxError("sparsity_ratio: sigma_train must be >= 0");
  double tau = 0.01 * sigma_train;
  std::size_t changed = 0;
  for (std::size_t i = 0; i < x.values.size(); ++i)
    if (std::abs(static_cast<double>(x_cf.values[i]) - x.values[i]) > tau) ++changed;
  return static_cast<double>(changed) / static_cast<double>(x.values.size());
}

LpSparsity lp_sparsity(const Series& x, const Series& x_cf) {
  if (x.values.size() != x_cf.values.size()) throw CfxError("lp_sparsity: shape mismatch");
  LpSparsity out;
  std::size_t n_diff = 0;
  double sq = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    double d = static_cast<double>(x_cf.values[i]) - x.values[i];
    if (d != 0.0) ++n_diff;
    out.l1 += std::abs(d);
    sq += d * d;
  }
  out.l0 = static_cast<double>(n_diff) / static_cast<double>(x.values.size());
  out.l2 = std::sqrt(sq);
  return out;
}

double noise_stability(const Model& model, const Series& x_cf, const NoiseLevels& levels,
                       std::uint64_t seed) {
  for (double f : levels.fractions)
    if (!(f > 0.0)) throw CfxError("noise_stability: noise fractions must be positive");
  if (levels.n_trials < 1) throw CfxError("noise_stability: n_trials must be positive");

  LabelVec base = model.predict(x_cf);
  double mean = 0.0;
  for (float v : x_cf.values) mean += v;
  mean /= static_cast<double>(x_cf.values.size());
  double var = 0.0;
  for (float v : x_cf.values) {
    double d = v - mean;
    var += d * d;
  }
  double sd = std::sqrt(var / static_cast<double>(x_cf.values.size()));
  if (sd == 0.0) return 1.0;  // zero noise keeps the prediction by definition

  std::size_t kept = 0, total = 0;
  Series noisy = x_cf;
  for (std::size_t li = 0; li < levels.fractions.size(); ++li) {
    double sigma = levels.fractions[li] * sd;
    for (int trial = 0; trial < levels.n_trials; ++trial) {
      std::mt19937_64 rng(mix_seed(seed, li * 1000003ULL + static_cast<std::uint64_t>(trial)));
      for (std::size_t i = 0; i < noisy.values.size(); ++i)
        noisy.values[i] = static_cast<float>(x_cf.values[i] + sigma * rng_normal(rng));
      if (model.predict(noisy) == base) ++kept;
      ++total;
    }
  }
  return static_cast<double>(kept) / static_cast<double>(total);
}

double temporal_stability(const Series& x_cf, const ShiftSet& shifts, std::optional<int> band) {
  if (shifts.shifts.empty()) throw CfxError("temporal_stability: empty shift set");
  double norm = std::sqrt(static_cast<double>(x_cf.t) * static_cast<double>(x_cf.c));
  double acc = 0.0;
  for (int tau : shifts.shifts) {
    if (tau == 0 || std::abs(tau) >= x_cf.t)
      throw CfxError("temporal_stability: shifts must be nonzero and |tau| < T");
    acc += dtw_distance(x_cf, shift_series(x_cf, tau), band) / norm;
  }
  double mean = acc / static_cast<double>(shifts.shifts.size());
  return 1.0 / (1.0 + mean);
}

double decision_margin(const ProbVec& probs, const ModelThresholds& thresholds, int cls) {
  if (cls < 0 || static_cast<std::size_t>(cls) >= probs.size() ||
      probs.size() != thresholds.t.size())
    throw CfxError("decision_margin: class index out of range");
  return probs[static_cast<std::size_t>(cls)] - thresholds.t[static_cast<std::size_t>(cls)];
}

double composite_quality(const MetricsEntry& entry, const QWeights& weights) {
  if (weights.w_v < 0 || weights.w_s < 0 || weights.w_st < 0 || weights.w_m < 0)
    throw CfxError("composite_quality: weights must be non-negative");
  if (weights.w_v == 0 && weights.w_s == 0 && weights.w_st == 0 && weights.w_m == 0)
    throw CfxError("composite_quality: at least one weight must be positive");
  return weights.w_v * entry.validity + weights.w_s * (1.0 - entry.sparsity_ratio) +
         weights.w_st * entry.noise_stability + weights.w_m * entry.decision_margin;
}

namespace {

std::string group_key(const MetricsEntry& e, const std::vector<GroupKey>& group_by) {
  std::string key;
  for (GroupKey g : group_by) {
    switch (g) {
      case GroupKey::InitialClass: key += e.initial_class; break;
      case GroupKey::TargetClass: key += e.target_class; break;
      case GroupKey::Variant: key += e.variant; break;
    }
    key += '\x1f';
  }
  return key;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::vector<AggregateRow> aggregate_report(const std::vector<MetricsEntry>& entries,
                                           const std::vector<GroupKey>& group_by) {
  if (entries.empty()) throw CfxError("aggregate_report: no entries");
  std::vector<std::string> order;
  std::map<std::string, AggregateRow> groups;
  std::map<std::string, double> q_sums;
  std::map<std::string, std::size_t> q_counts;

  for (const MetricsEntry& e : entries) {
    std::string key = group_key(e, group_by);
    auto it = groups.find(key);
    if (it == groups.end()) {
      order.push_back(key);
      AggregateRow row;
      for (GroupKey g : group_by) {
        if (g == GroupKey::InitialClass) row.initial_class = e.initial_class;
        if (g == GroupKey::TargetClass) row.target_class = e.target_class;
        if (g == GroupKey::Variant) row.variant = e.variant;
      }
      it = groups.emplace(key, std::move(row)).first;
    }
    AggregateRow& r = it->second;
    r.n += 1;
    r.validity += e.validity;
    r.validity_multi += e.validity_multi;
    r.sparsity_ratio += e.sparsity_ratio;
    r.l0 += e.l0;
    r.l1 += e.l1;
    r.l2 += e.l2;
    r.noise_stability += e.noise_stability;
    r.temporal_stability += e.temporal_stability;
    r.decision_margin += e.decision_margin;
    if (e.q) {
      q_sums[key] += *e.q;
      q_counts[key] += 1;
    }
  }

  std::vector<AggregateRow> rows;
  rows.reserve(order.size());
  for (const std::string& key : order) {
    AggregateRow r = groups[key];
    auto n = static_cast<double>(r.n);
    r.validity /= n;
    r.validity_multi /= n;
    r.sparsity_ratio /= n;
    r.l0 /= n;
    r.l1 /= n;
    r.l2 /= n;
    r.noise_stability /= n;
    r.temporal_stability /= n;
    r.decision_margin /= n;
    if (q_counts.count(key) && q_counts[key] == r.n) r.q = q_sums[key] / n;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string report_csv(const std::vector<MetricsEntry>& entries) {
  std::string out =
      "query_id,initial_class,target_class,variant,validity,validity_multi,sparsity_ratio,l0,l1,"
      "l2,noise_stability,temporal_stability,decision_margin,q\n";
  for (const MetricsEntry& e : entries) {
    out += e.query_id + ',' + e.initial_class + ',' + e.target_class + ',' + e.variant + ',';
    out += std::to_string(e.validity) + ',' + std::to_string(e.validity_multi) + ',';
    out += format_double(e.sparsity_ratio) + ',' + format_double(e.l0) + ',' +
           format_double(e.l1) + ',' + format_double(e.l2) + ',';
    out += format_double(e.noise_stability) + ',' + format_double(e.temporal_stability) + ',' +
           format_double(e.decision_margin) + ',';
    out += e.q ? format_double(*e.q) : std::string{};
    out += '\n';
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows,
                          const std::vector<GroupKey>& group_by) {
  std::string out;
  for (GroupKey g : group_by) {
    if (g == GroupKey::InitialClass) out += "initial_class,";
    if (g == GroupKey::TargetClass) out += "target_class,";
    if (g == GroupKey::Variant) out += "variant,";
  }
  out +=
      "n,validity,validity_multi,sparsity_ratio,l0,l1,l2,noise_stability,temporal_stability,"
      "decision_margin,q\n";
  for (const AggregateRow& r : rows) {
    for (GroupKey g : group_by) {
      if (g == GroupKey::InitialClass) out += r.initial_class + ',';
      if (g == GroupKey::TargetClass) out += r.target_class + ',';
      if (g == GroupKey::Variant) out += r.variant + ',';
    }
    out += std::to_string(r.n) + ',';
    out += format_double(r.validity) + ',' + format_double(r.validity_multi) + ',' +
           format_double(r.sparsity_ratio) + ',' + format_double(r.l0) + ',' +
           format_double(r.l1) + ',' + format_double(r.l2) + ',' +
           format_double(r.noise_stability) + ',' + format_double(r.temporal_stability) + ',' +
           format_double(r.decision_margin) + ',';
    out += r.q ? format_double(*r.q) : std::string{};
    out += '\n';
  }
  return out;
}

}  // namespace cfx
