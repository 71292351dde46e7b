#pragma once

// Shared test fixtures: tiny deterministic stub models and series builders.

#include <cmath>
#include <string>
#include <vector>

#include "cfx/classifier.hpp"

namespace cfxtest {

inline cfx::Series from_vector(const std::string& id, const std::vector<float>& v) {
  cfx::Series s;
  s.record_id = id;
  s.t = static_cast<int>(v.size());
  s.c = 1;
  s.values = v;
  return s;
}

inline cfx::Series filled(const std::string& id, int t, int c, float value) {
  cfx::Series s;
  s.record_id = id;
  s.t = t;
  s.c = c;
  s.values.assign(static_cast<std::size_t>(t) * c, value);
  return s;
}

// Fixed probability vector regardless of input.
class ConstModel : public cfx::Model {
 public:
  explicit ConstModel(cfx::ProbVec probs, std::vector<double> thresholds = {})
      : probs_(std::move(probs)) {
    for (std::size_t i = 0; i < probs_.size(); ++i) classes_.push_back("K" + std::to_string(i));
    cfx::ModelThresholds th;
    th.t = thresholds.empty() ? std::vector<double>(probs_.size(), 0.5) : std::move(thresholds);
    set_thresholds(th);
  }
  int expected_timesteps() const override { return -1; }
  int expected_channels() const override { return -1; }
  const std::vector<std::string>& class_names() const override { return classes_; }

 protected:
  cfx::ProbVec compute_proba(const cfx::Series&) const override { return probs_; }

 private:
  cfx::ProbVec probs_;
  std::vector<std::string> classes_;
};

// Two classes decided by one watched coordinate: value <= boundary reads as
// class 0, above it as class 1.
class BoundaryModel : public cfx::Model {
 public:
  BoundaryModel(int t0, int c0, double boundary) : t0_(t0), c0_(c0), boundary_(boundary) {
    cfx::ModelThresholds th;
    th.t = {0.5, 0.5};
    set_thresholds(th);
  }
  int expected_timesteps() const override { return -1; }
  int expected_channels() const override { return -1; }
  const std::vector<std::string>& class_names() const override { return classes_; }

 protected:
  cfx::ProbVec compute_proba(const cfx::Series& s) const override {
    return s.at(t0_, c0_) <= boundary_ ? cfx::ProbVec{0.9, 0.1} : cfx::ProbVec{0.1, 0.9};
  }

 private:
  int t0_, c0_;
  double boundary_;
  std::vector<std::string> classes_ = {"A", "B"};
};

// Two classes decided by the mean of a single window on one channel.
class WindowMeanModel : public cfx::Model {
 public:
  WindowMeanModel(int t0, int len, int channel, double boundary)
      : t0_(t0), len_(len), channel_(channel), boundary_(boundary) {
    cfx::ModelThresholds th;
    th.t = {0.5, 0.5};
    set_thresholds(th);
  }
  int expected_timesteps() const override { return -1; }
  int expected_channels() const override { return -1; }
  const std::vector<std::string>& class_names() const override { return classes_; }

 protected:
  cfx::ProbVec compute_proba(const cfx::Series& s) const override {
    double m = 0.0;
    for (int t = t0_; t < t0_ + len_; ++t) m += s.at(t, channel_);
    m /= len_;
    return m <= boundary_ ? cfx::ProbVec{0.9, 0.1} : cfx::ProbVec{0.1, 0.9};
  }

 private:
  int t0_, len_, channel_;
  double boundary_;
  std::vector<std::string> classes_ = {"A", "B"};
};

// Smooth two-class model reading only one channel's mean.
class ChannelMeanModel : public cfx::Model {
 public:
  explicit ChannelMeanModel(int channel) : channel_(channel) {
    cfx::ModelThresholds th;
    th.t = {0.5, 0.5};
    set_thresholds(th);
  }
  int expected_timesteps() const override { return -1; }
  int expected_channels() const override { return -1; }
  const std::vector<std::string>& class_names() const override { return classes_; }

 protected:
  cfx::ProbVec compute_proba(const cfx::Series& s) const override {
    double m = 0.0;
    for (int t = 0; t < s.t; ++t) m += s.at(t, channel_);
    m /= s.t;
    double p = 1.0 / (1.0 + std::exp(-m));
    return {p, 1.0 - p};
  }

 private:
  int channel_;
  std::vector<std::string> classes_ = {"A", "B"};
};

}  // namespace cfxtest
