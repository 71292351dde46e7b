#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfx/series.hpp"
#include "cfx/sparsify.hpp"

namespace cfx {

// Stacked per-channel panels: query trace, counterfactual trace(s), shaded
// mask regions, optional attribution heat strip. Output is deterministic for
// fixed inputs (fixed-precision coordinates, no timestamps).
void render_overlay(const Series& query,
                    const std::vector<std::pair<std::string, const Series*>>& cf_variants,
                    const Mask* mask, const std::vector<float>* attribution,
                    const std::filesystem::path& out_path);

}  // namespace cfx
