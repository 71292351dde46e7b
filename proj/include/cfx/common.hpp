#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace cfx {

// Library-level error. The CLI maps any CfxError to exit code 2.
class CfxError : public std::runtime_error {
 public:
  explicit CfxError(const std::string& what) : std::runtime_error(what) {}
};

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from the CFX_LOG environment variable (error|info|debug),
// parsed once on first use. Default is info. Output goes to stderr so
// machine-readable stdout stays clean.
LogLevel log_level();
void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// Write-to-temp-then-rename so a crash never leaves a partial file behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);
void atomic_write(const std::filesystem::path& path, const void* data, std::size_t bytes);

std::string read_text_file(const std::filesystem::path& path);

// splitmix64 step; lets one user-facing seed feed many independent streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t hash_str(const std::string& s);

// Portable draws over mt19937_64. std::uniform_*_distribution output is
// implementation-defined, which would break bit-identical reruns across
// standard libraries, so these are fixed formulas instead.
double rng_uniform(std::mt19937_64& rng);                       // [0,1)
double rng_normal(std::mt19937_64& rng);                        // standard normal
std::uint64_t rng_index(std::mt19937_64& rng, std::uint64_t n);  // [0,n)

// Runs fn(i) for i in [0, n). Splits into contiguous blocks over worker
// threads; degrades to a plain loop on single-core machines or tiny n.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cfx
