#pragma once

#include <cstdint>

#include "cfx/series.hpp"

namespace cfx {

struct SynthConfig {
  int n_classes = 3;   // 2..6, named NORM, MI, STTC, CD, HYP, AFIB
  int per_class = 200;
  int t = 500;
  int c = 4;
  std::uint64_t seed = 7;
};

// ECG-flavoured beat train: Gaussian R-spikes on the given lead over a noisy
// baseline. Exposed for alignment/peak tests.
Series make_beat_train(const std::string& id, int t, int c, int lead, int period, int phase,
                       double amplitude, double noise_sd, std::uint64_t seed);

// Deterministic multi-channel dataset with class-distinct morphologies
// (R-spike amplitude, post-beat wave shape, per-channel offsets) that a
// summary-feature classifier separates cleanly. Labels are single-label.
// stats are filled from the generated records.
Dataset make_synthetic_dataset(const SynthConfig& config = {});

}  // namespace cfx
