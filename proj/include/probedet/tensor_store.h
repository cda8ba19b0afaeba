#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace probedet {

enum class Label : uint8_t { kHwt = 0, kLgt = 1, kUnknown = 2 };

std::string_view LabelName(Label label);
// Accepts "HWT", "LGT", "UNKNOWN"; anything else is an ArgumentError.
Label ParseLabel(std::string_view name);

// Inclusive, 1-based layer interval.
struct LayerRange {
  uint32_t lo = 1;
  uint32_t hi = 1;

  uint32_t size() const { return hi - lo + 1; }
  bool operator==(const LayerRange&) const = default;
};

// One sample's hidden states, stored layer-major then token-major:
// value(l, t, k) lives at ((l * tokens) + t) * dim + k, all indices 0-based.
// Shape is validated on construction; finiteness is checked by the codec.
class ActivationTensor {
 public:
  ActivationTensor(std::string sample_id, Label label, uint32_t layers,
                   uint32_t tokens, uint32_t dim, std::vector<float> values);

  const std::string& sample_id() const { return sample_id_; }
  Label label() const { return label_; }
  uint32_t layers() const { return layers_; }
  uint32_t tokens() const { return tokens_; }
  uint32_t dim() const { return dim_; }
  std::span<const float> values() const { return values_; }

  // Hidden vector of 0-based `layer` at 0-based `token`.
  std::span<const float> At(uint32_t layer, uint32_t token) const {
    return std::span<const float>(values_).subspan(
        (static_cast<size_t>(layer) * tokens_ + token) * dim_, dim_);
  }

  bool AllFinite() const;

  // Bitwise comparison on values, exact on metadata.
  bool operator==(const ActivationTensor& other) const;

 private:
  std::string sample_id_;
  Label label_;
  uint32_t layers_;
  uint32_t tokens_;
  uint32_t dim_;
  std::vector<float> values_;
};

inline constexpr std::string_view kActivationMagic = "RGAF";
inline constexpr uint16_t kActivationVersion = 1;

// RGAF v1 codec. Layout (all integers little-endian):
//   "RGAF" | u16 version | u32 L | u32 n | u32 d | u32 id_len | id bytes |
//   u8 label | L*n*d f32 | u32 CRC32 of every preceding byte
std::vector<std::byte> EncodeActivation(const ActivationTensor& tensor);
ActivationTensor DecodeActivation(std::span<const std::byte> bytes);

// Rejects non-finite tensors before touching the filesystem.
void WriteActivationFile(const ActivationTensor& tensor,
                         const std::string& path);
ActivationTensor ReadActivationFile(const std::string& path);

}  // namespace probedet
