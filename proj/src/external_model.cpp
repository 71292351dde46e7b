#include "cfx/external_model.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>

#include <json.hpp>

namespace cfx {

using json = nlohmann::json;

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::string base64_encode(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::string out;
  out.reserve(((len + 2) / 3) * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    unsigned v = p[i] << 16;
    if (i + 1 < len) v |= p[i + 1] << 8;
    if (i + 2 < len) v |= p[i + 2];
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += (i + 1 < len) ? kB64Alphabet[(v >> 6) & 63] : '=';
    out += (i + 2 < len) ? kB64Alphabet[v & 63] : '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  auto value_of = [](char ch) -> int {
    if (ch >= 'A' && ch <= 'Z') return ch - 'A';
    if (ch >= 'a' && ch <= 'z') return ch - 'a' + 26;
    if (ch >= '0' && ch <= '9') return ch - '0' + 52;
    if (ch == '+') return 62;
    if (ch == '/') return 63;
    return -1;
  };
  std::vector<unsigned char> out;
  unsigned acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=' || ch == '\n' || ch == '\r') continue;
    int v = value_of(ch);
    if (v < 0) throw CfxError("base64: invalid character");
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

ExternalModel::ExternalModel(const std::string& command) {
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw CfxError("external model: pipe() failed");

  pid_t pid = fork();
  if (pid < 0) throw CfxError("external model: fork() failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  child_pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  try {
    json hello = json::parse(request(R"({"op":"hello"})"));
    classes_ = hello.at("classes").get<std::vector<std::string>>();
    t_ = hello.value("T", -1);
    c_ = hello.value("C", -1);
  } catch (const json::exception& e) {
    shutdown();
    throw CfxError("external model handshake: " + std::string(e.what()));
  } catch (...) {
    shutdown();
    throw;
  }
  if (classes_.size() < 2) {
    shutdown();
    throw CfxError("external model handshake: need at least 2 classes");
  }
  // The handshake carries no calibration, so start from the natural cutoff
  // for independent per-class probabilities; callers with calibrated values
  // override via set_thresholds.
  ModelThresholds th;
  th.t.assign(classes_.size(), 0.5);
  set_thresholds(std::move(th));
}

ExternalModel::~ExternalModel() { shutdown(); }

void ExternalModel::shutdown() noexcept {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (child_pid_ > 0) {
    int status = 0;
    if (waitpid(child_pid_, &status, WNOHANG) == 0) {
      kill(child_pid_, SIGTERM);
      waitpid(child_pid_, &status, 0);
    }
    child_pid_ = -1;
  }
}

std::string ExternalModel::request(const std::string& line) const {
  std::string payload = line + "\n";
  std::size_t written = 0;
  while (written < payload.size()) {
    ssize_t n = write(to_child_, payload.data() + written, payload.size() - written);
    if (n <= 0) throw CfxError("external model: write failed (child gone?)");
    written += static_cast<std::size_t>(n);
  }
  for (;;) {
    auto nl = read_buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string reply = read_buffer_.substr(0, nl);
      read_buffer_.erase(0, nl + 1);
      return reply;
    }
    char chunk[4096];
    ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n <= 0) throw CfxError("external model: child closed the channel");
    read_buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

ProbVec ExternalModel::compute_proba(const Series& s) const {
  std::lock_guard<std::mutex> lock(io_mutex_);
  json req;
  req["op"] = "predict";
  req["T"] = s.t;
  req["C"] = s.c;
  req["series_b64"] = base64_encode(s.values.data(), s.values.size() * sizeof(float));
  std::string reply = request(req.dump());
  json resp;
  try {
    resp = json::parse(reply);
  } catch (const json::exception& e) {
    throw CfxError("external model: bad reply: " + std::string(e.what()));
  }
  if (resp.contains("error"))
    throw CfxError("external model error: " + resp["error"].get<std::string>());
  ProbVec probs = resp.at("probs").get<ProbVec>();
  if (probs.size() != classes_.size())
    throw CfxError("external model: probs length does not match class list");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0)) throw CfxError("external model: probability out of [0,1]");
  return probs;
}

}  // namespace cfx
