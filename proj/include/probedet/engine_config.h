#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "probedet/tensor_store.h"

namespace probedet {

// Settings shared by the CLI subcommands. JSON keys match the CLI flag names
// with '-' replaced by '_'; unknown keys are rejected.
struct EngineConfig {
  // Unset means: the manifest's activation_ratio when fitting, the model's
  // fitted ratio when scoring.
  std::optional<double> ratio;
  std::optional<LayerRange> layers;  // unset = every layer
  double fpr_level = 0.01;
  uint32_t rounds = 5;
  uint64_t seed = 0;
  uint32_t train_pairs = 512;
  uint32_t test_pairs = 1000;
  std::optional<double> threshold;
  int bins = 50;
  std::string out;          // model_out for fit, output path elsewhere
  std::string metrics_out;  // optional metrics JSON destination
};

// "LO:HI" with 1 <= LO <= HI.
LayerRange ParseLayerRange(std::string_view text);

EngineConfig ParseEngineConfig(const std::string& json_text);
EngineConfig LoadEngineConfig(const std::string& path);

// Range checks shared by file and flag sources.
void ValidateEngineConfig(const EngineConfig& config);

}  // namespace probedet
