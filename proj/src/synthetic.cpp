#include "cfx/synthetic.hpp"

#include <cmath>
#include <cstdio>

namespace cfx {

namespace {

const char* kClassNames[6] = {"NORM", "MI", "STTC", "CD", "HYP", "AFIB"};

// Class-distinct morphology knobs, indexed by class.
constexpr double kSpikeAmp[6] = {10.0, 7.5, 12.5, 9.0, 14.0, 6.0};
constexpr double kWaveAmp[6] = {1.5, -2.5, 3.0, -1.5, 2.2, 0.8};
constexpr double kSineAmp[6] = {0.8, 1.6, 2.4, 1.2, 2.0, 0.4};
constexpr double kSineLen[6] = {50.0, 62.0, 74.0, 56.0, 68.0, 44.0};
constexpr double kOffset[6] = {-1.2, 0.0, 1.2, -0.6, 0.6, 1.8};
constexpr double kDrift[6] = {0.5, -0.5, 1.5, 1.0, -1.0, 0.0};

void add_bump(Series& s, int channel, int center, double amplitude, double width) {
  int reach = static_cast<int>(std::ceil(width * 3.0));
  for (int dt = -reach; dt <= reach; ++dt) {
    int t = center + dt;
    if (t < 0 || t >= s.t) continue;
    double u = static_cast<double>(dt) / width;
    s.at(t, channel) += static_cast<float>(amplitude * std::exp(-0.5 * u * u));
  }
}

}  // namespace

Series make_beat_train(const std::string& id, int t, int c, int lead, int period, int phase,
                       double amplitude, double noise_sd, std::uint64_t seed) {
  if (lead < 0 || lead >= c) throw CfxError("make_beat_train: lead out of range");
  if (period < 2 || phase < 0) throw CfxError("make_beat_train: bad period/phase");
  Series s(id, t, c);
  std::mt19937_64 rng(seed);
  if (noise_sd > 0.0)
    for (float& v : s.values) v = static_cast<float>(noise_sd * rng_normal(rng));
  for (int p = phase; p < t - 8; p += period) {
    double jitter = 1.0 + 0.03 * (2.0 * rng_uniform(rng) - 1.0);
    add_bump(s, lead, p, amplitude * jitter, 2.0);
  }
  return s;
}

Dataset make_synthetic_dataset(const SynthConfig& config) {
  if (config.n_classes < 2 || config.n_classes > 6)
    throw CfxError("make_synthetic_dataset: n_classes must lie in [2,6]");
  if (config.per_class < 1 || config.t < 60 || config.c < 2)
    throw CfxError("make_synthetic_dataset: need per_class >= 1, t >= 60, c >= 2");

  Dataset d;
  for (int k = 0; k < config.n_classes; ++k) d.class_names.emplace_back(kClassNames[k]);

  int lead = 1;
  for (int k = 0; k < config.n_classes; ++k) {
    for (int r = 0; r < config.per_class; ++r) {
      std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(k) * 1000003ULL +
                                                    static_cast<std::uint64_t>(r)));
      char id[32];
      std::snprintf(id, sizeof(id), "%s%04d", kClassNames[k], r);
      Series s(id, config.t, config.c);

      int period = 70 + static_cast<int>(rng_index(rng, 26));
      int phase = 15 + static_cast<int>(rng_index(rng, 40));

      for (int t = 0; t < config.t; ++t) {
        double x = static_cast<double>(t);
        s.at(t, 0) = static_cast<float>(kSineAmp[k] * std::sin(2.0 * 3.141592653589793 *
                                                               (x + 3.0 * k) / kSineLen[k]));
        if (config.c > 2) s.at(t, 2) = static_cast<float>(kOffset[k]);
        if (config.c > 3)
          s.at(t, 3) = static_cast<float>(kDrift[k] * (2.0 * x / config.t - 1.0));
      }

      for (int p = phase; p < config.t - 8; p += period) {
        double jitter = 1.0 + 0.03 * (2.0 * rng_uniform(rng) - 1.0);
        add_bump(s, lead, p, kSpikeAmp[k] * jitter, 2.0);
        add_bump(s, lead, p + 14, kWaveAmp[k], 4.0);
        if (config.c > 2) add_bump(s, 2, p + 4, 0.3 * kSpikeAmp[k], 3.0);
      }

      for (float& v : s.values) v += static_cast<float>(0.08 * rng_normal(rng));

      d.records.push_back(std::move(s));
      LabelVec lv(static_cast<std::size_t>(config.n_classes));
      lv.set(static_cast<std::size_t>(k));
      d.labels.push_back(std::move(lv));
    }
  }
  d.stats = zscore_stats(d);
  return d;
}

}  // namespace cfx
