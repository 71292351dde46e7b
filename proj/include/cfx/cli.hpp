#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfx/attribution.hpp"
#include "cfx/engine.hpp"
#include "cfx/metrics.hpp"
#include "cfx/prototypes.hpp"

namespace cfx {

// Parsed command parameter structs are exposed so the pipeline is drivable
// programmatically (tests, batch runs) without argv plumbing.

struct ModelSpec {
  std::filesystem::path model_file;   // reference classifier JSON
  std::string adapter;                // external adapter command (wins when set)
  std::vector<double> thresholds;     // optional per-class threshold override
};
std::unique_ptr<Model> open_model(const ModelSpec& spec);

struct FitParams {
  std::filesystem::path dataset;
  std::filesystem::path out;
  ReferenceConfig config;
};
int cmd_fit(const FitParams& p);

struct MineParams {
  std::filesystem::path dataset;
  ModelSpec model;
  std::filesystem::path out;
  MiningConfig config;
};
int cmd_mine(const MineParams& p);

struct ExplainParams {
  std::filesystem::path dataset;
  std::filesystem::path db;
  ModelSpec model;
  std::string record_id;
  std::optional<std::string> target;  // class name
  std::filesystem::path out;          // result directory
  std::optional<std::filesystem::path> svg;
  ExplainOptions options;
};
int cmd_explain(const ExplainParams& p);

struct EvaluateParams {
  std::filesystem::path dataset;
  std::filesystem::path results;  // directory of result directories
  ModelSpec model;
  std::filesystem::path out;      // per-query CSV; aggregates derive from it
  std::optional<QWeights> q_weights;
  std::uint64_t seed = 0;
  std::optional<int> band;
};
int cmd_evaluate(const EvaluateParams& p);

struct RulesParams {
  std::filesystem::path dataset;
  ModelSpec model;
  std::optional<std::filesystem::path> attr;  // attr.f32 (or its directory)
  bool occlusion = false;
  int window = 25;
  RuleConfig config;
  std::filesystem::path out;  // JSONL
  int max_records = 0;        // 0 = all
};
int cmd_rules(const RulesParams& p);

struct RenderParams {
  std::filesystem::path dataset;
  std::filesystem::path result_dir;
  std::filesystem::path out;
  std::string variant;  // empty = last available variant
};
int cmd_render(const RenderParams& p);

int run_cli(int argc, char** argv);

}  // namespace cfx
