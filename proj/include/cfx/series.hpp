#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfx/common.hpp"

namespace cfx {

// Additive fuzz applied to sigma during normalization so constant signals
// do not divide by zero.
inline constexpr double kNormEpsilon = 1e-7;

// One multivariate record: T time steps by C channels, row-major float32
// (time-major, channel fastest).
struct Series {
  std::string record_id;
  int t = 0;
  int c = 0;
  std::vector<float> values;

  Series() = default;
  Series(std::string id, int t_steps, int channels)
      : record_id(std::move(id)),
        t(t_steps),
        c(channels),
        values(static_cast<std::size_t>(t_steps) * static_cast<std::size_t>(channels), 0.0f) {}

  float& at(int time, int channel) {
    return values[static_cast<std::size_t>(time) * c + channel];
  }
  float at(int time, int channel) const {
    return values[static_cast<std::size_t>(time) * c + channel];
  }
  std::size_t size() const { return values.size(); }
};

// Throws CfxError unless T >= 2, C >= 1, values.size() == T*C and all
// values are finite.
void validate_series(const Series& s);

// Multi-hot label assignment, one flag per class.
struct LabelVec {
  std::vector<std::uint8_t> bits;

  LabelVec() = default;
  explicit LabelVec(std::size_t n_classes) : bits(n_classes, 0) {}

  std::size_t size() const { return bits.size(); }
  bool test(std::size_t i) const { return bits[i] != 0; }
  void set(std::size_t i, bool v = true) { bits[i] = v ? 1 : 0; }
  bool any() const;
  std::size_t count() const;

  friend bool operator==(const LabelVec& a, const LabelVec& b) = default;
};

struct NormStats {
  double mu = 0.0;
  double sigma = 0.0;
};

struct Dataset {
  std::vector<Series> records;
  std::vector<LabelVec> labels;
  std::vector<std::string> class_names;
  NormStats stats;

  std::size_t size() const { return records.size(); }
  int n_timesteps() const { return records.empty() ? 0 : records.front().t; }
  int n_channels() const { return records.empty() ? 0 : records.front().c; }

  std::optional<std::size_t> find_record(const std::string& record_id) const;
  int class_index(const std::string& name) const;  // -1 when absent
};

// Shape/label consistency checks for a fully assembled dataset.
void validate_dataset(const Dataset& d);

// Global scalar mean and population standard deviation pooled over every
// value of every record.
NormStats zscore_stats(const Dataset& d);

// (v - mu) / (sigma + kNormEpsilon), elementwise. denormalize inverts it.
Series normalize(const Series& s, const NormStats& stats);
Series denormalize(const Series& s, const NormStats& stats);

// Temporal shift by tau steps with edge replication: output[t] =
// input[clamp(t - tau, 0, T-1)]. Positive tau moves content rightward.
Series shift_series(const Series& s, int tau);

}  // namespace cfx
