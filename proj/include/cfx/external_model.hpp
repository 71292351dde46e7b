#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "cfx/classifier.hpp"

namespace cfx {

// Adapter for an out-of-process model. The child speaks line-delimited JSON
// on stdin/stdout:
//   {"op":"hello"}                        -> {"classes":[...],"T":int,"C":int}
//   {"op":"predict","T":..,"C":..,
//    "series_b64":<base64 LE binary32>}   -> {"probs":[...]} | {"error":...}
// Requests are serialized; at most one is in flight at a time.
class ExternalModel : public Model {
 public:
  explicit ExternalModel(const std::string& command);
  ~ExternalModel() override;

  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;

  int expected_timesteps() const override { return t_; }
  int expected_channels() const override { return c_; }
  const std::vector<std::string>& class_names() const override { return classes_; }

 protected:
  ProbVec compute_proba(const Series& s) const override;

 private:
  std::string request(const std::string& line) const;  // one round trip
  void shutdown() noexcept;

  mutable std::mutex io_mutex_;
  mutable std::string read_buffer_;
  int child_pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::vector<std::string> classes_;
  int t_ = -1;
  int c_ = -1;
};

std::string base64_encode(const void* data, std::size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace cfx
