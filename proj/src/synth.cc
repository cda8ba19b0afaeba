#include "probedet/synth.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "probedet/errors.h"
#include "probedet/rng.h"

namespace probedet {

void ValidateSynthSpec(const SynthSpec& spec) {
  if (spec.pair_count < 1 || spec.dim < 1 || spec.layers < 1 ||
      spec.tokens < 1) {
    Fail(ErrorCode::kArgument, "synthetic N, d, L and n must all be >= 1");
  }
  if (!(spec.noise_std > 0.0) || !std::isfinite(spec.noise_std)) {
    Fail(ErrorCode::kArgument, "noise_std must be > 0");
  }
  if (!(spec.shift >= 0.0) || !std::isfinite(spec.shift)) {
    Fail(ErrorCode::kArgument, "shift must be >= 0");
  }
  if (spec.layer_mask && spec.layer_mask->size() != spec.layers) {
    Fail(ErrorCode::kArgument, "layer mask needs one flag per layer");
  }
  if (!(spec.activation_ratio > 0.0 && spec.activation_ratio <= 1.0)) {
    Fail(ErrorCode::kArgument, "activation_ratio must lie in (0, 1]");
  }
}

std::vector<TensorPair> SynthDataset::Pairs() const {
  return Pairs(0, tensors.size() / 2);
}

std::vector<TensorPair> SynthDataset::Pairs(size_t first, size_t count) const {
  if (first + count > tensors.size() / 2) {
    Fail(ErrorCode::kArgument, "pair slice out of range");
  }
  std::vector<TensorPair> out;
  out.reserve(count);
  for (size_t i = first; i < first + count; ++i) {
    out.push_back({&tensors[2 * i], &tensors[2 * i + 1]});
  }
  return out;
}

SynthDataset Synthesize(const SynthSpec& spec) {
  ValidateSynthSpec(spec);
  const size_t d = spec.dim;
  SynthDataset out;

  Rng direction_rng(DeriveSeed(spec.seed, 0));
  for (uint32_t l = 0; l < spec.layers; ++l) {
    std::vector<double> u(d, 0.0);
    if (spec.direction_mode == DirectionMode::kBasis) {
      u[l % d] = 1.0;
    } else {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (double& x : u) {
          x = direction_rng.Normal();
          norm += x * x;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (double& x : u) x /= norm;
    }
    out.directions.push_back(std::move(u));
  }

  out.manifest.dataset_name = "synthetic";
  out.manifest.surrogate_id = "synthetic-gaussian";
  out.manifest.tokenizer_id = "none";
  out.manifest.activation_ratio = spec.activation_ratio;
  out.manifest.layer_range = {1, spec.layers};

  const size_t count = static_cast<size_t>(spec.layers) * spec.tokens * d;
  const double jitter_std = spec.noise_std / 4.0;
  out.tensors.reserve(static_cast<size_t>(spec.pair_count) * 2);
  for (uint32_t i = 0; i < spec.pair_count; ++i) {
    Rng rng(DeriveSeed(spec.seed, static_cast<uint64_t>(i) + 1));
    std::vector<float> hwt(count);
    std::vector<float> lgt(count);
    for (size_t k = 0; k < count; ++k) {
      hwt[k] = static_cast<float>(spec.noise_std * rng.Normal());
    }
    for (uint32_t l = 0; l < spec.layers; ++l) {
      const bool shifted = !spec.layer_mask || (*spec.layer_mask)[l];
      const auto& u = out.directions[l];
      for (uint32_t t = 0; t < spec.tokens; ++t) {
        const size_t base = (static_cast<size_t>(l) * spec.tokens + t) * d;
        for (size_t k = 0; k < d; ++k) {
          double v = static_cast<double>(hwt[base + k]) +
                     jitter_std * rng.Normal();
          if (shifted) v += spec.shift * u[k];
          lgt[base + k] = static_cast<float>(v);
        }
      }
    }
    char id[32];
    std::snprintf(id, sizeof(id), "p%05u", i);
    const std::string pair_id(id);
    out.tensors.emplace_back(pair_id + "-lgt", Label::kLgt, spec.layers,
                             spec.tokens, spec.dim, std::move(lgt));
    out.tensors.emplace_back(pair_id + "-hwt", Label::kHwt, spec.layers,
                             spec.tokens, spec.dim, std::move(hwt));
    out.manifest.entries.push_back(
        {pair_id + "-lgt.rgaf", pair_id + "-lgt", Label::kLgt, pair_id});
    out.manifest.entries.push_back(
        {pair_id + "-hwt.rgaf", pair_id + "-hwt", Label::kHwt, pair_id});
  }
  return out;
}

DatasetManifest GenerateSynthetic(const SynthSpec& spec,
                                  const std::string& out_dir) {
  SynthDataset data = Synthesize(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create '" + out_dir + "': " + ec.message());
  data.manifest.base_dir = out_dir;
  for (size_t i = 0; i < data.tensors.size(); ++i) {
    WriteActivationFile(data.tensors[i],
                        data.manifest.ResolvePath(data.manifest.entries[i]));
  }
  SaveManifest(data.manifest,
               (std::filesystem::path(out_dir) / "manifest.json").string());
  return std::move(data.manifest);
}

}  // namespace probedet
