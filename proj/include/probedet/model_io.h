#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "probedet/probing_model.h"

namespace probedet {

inline constexpr std::string_view kModelMagic = "RGPM";
inline constexpr uint16_t kModelVersion = 1;

// Layout (little-endian):
//   "RGPM" | u16 version | u32 header_len | header JSON (layer_range, dim,
//   orientation_applied, fit_stats) | u32 layer_count | u32 dim |
//   per layer: dim x f32 vector, f64 eigenvalue, dim x f64 mean |
//   u32 CRC32 of every preceding byte
std::vector<std::byte> SerializeModel(const ProbingModel& model);

// Vectors are widened from f32 and renormalized to unit length.
ProbingModel DeserializeModel(std::span<const std::byte> bytes);

void SaveModel(const ProbingModel& model, const std::string& path);
ProbingModel LoadModel(const std::string& path);

// The model exactly as it will be seen after a save/load cycle.
ProbingModel StorageRoundTrip(const ProbingModel& model);

// "rgpm1-" followed by the hex CRC32 stored in the serialized model (the
// checksum of everything before the trailer).
std::string ModelVersion(std::span<const std::byte> serialized);

}  // namespace probedet
