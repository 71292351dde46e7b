#pragma once

#include <filesystem>
#include <vector>

#include "cfx/series.hpp"

namespace cfx {

// Directory layout:
//   manifest.json  {"n_records","n_timesteps","n_channels","classes","mu","sigma"}
//   signals.f32    little-endian binary32, row-major [record][time][channel]
//   labels.csv     one row per record: record_id,CLASS1;CLASS2;...
Dataset load_dataset(const std::filesystem::path& dir);
void write_dataset(const std::filesystem::path& dir, const Dataset& d);

// Raw binary32 helpers shared by the other on-disk artifacts.
std::vector<float> read_f32(const std::filesystem::path& path, std::size_t expected_count);
void write_f32(const std::filesystem::path& path, const std::vector<float>& values);

}  // namespace cfx
