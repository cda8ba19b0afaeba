#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "probedet/feature_model.h"
#include "probedet/manifest.h"
#include "probedet/tensor_store.h"

namespace probedet {

enum class DirectionMode { kRandomUnit, kBasis };

// Paired Gaussian activations with a planted per-layer shift:
//   HWT tokens ~ N(0, noise_std^2 I)
//   LGT = HWT + shift * u_l (on masked layers) + N(0, (noise_std/4)^2 I)
struct SynthSpec {
  uint64_t seed = 0;
  uint32_t pair_count = 1;
  uint32_t dim = 1;
  uint32_t layers = 1;
  uint32_t tokens = 1;
  DirectionMode direction_mode = DirectionMode::kRandomUnit;
  double shift = 1.0;
  double noise_std = 1.0;
  std::optional<std::vector<bool>> layer_mask;  // default: every layer
  // Window ratio recorded in the emitted manifest.
  double activation_ratio = kDefaultActivationRatio;
};

void ValidateSynthSpec(const SynthSpec& spec);

struct SynthDataset {
  // Pair i is tensors[2i] (LGT) and tensors[2i + 1] (HWT).
  std::vector<ActivationTensor> tensors;
  // Planted unit direction per layer (dim values each).
  std::vector<std::vector<double>> directions;
  DatasetManifest manifest;  // file names relative to the output directory

  std::vector<TensorPair> Pairs() const;
  std::vector<TensorPair> Pairs(size_t first, size_t count) const;
};

// In-memory generation; a pure function of `spec`. Pair i draws from its own
// stream seeded with DeriveSeed(seed, i + 1), directions from stream 0.
SynthDataset Synthesize(const SynthSpec& spec);

// Writes one RGAF file per sample plus manifest.json into out_dir (created if
// missing) and returns the manifest.
DatasetManifest GenerateSynthetic(const SynthSpec& spec,
                                  const std::string& out_dir);

}  // namespace probedet
