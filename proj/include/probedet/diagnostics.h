#pragma once

#include <span>
#include <string>
#include <vector>

#include "probedet/manifest.h"
#include "probedet/tensor_store.h"

namespace probedet {

inline constexpr int kDefaultOverlapBins = 50;

// Histogram overlap sum_b min(p_a[b], p_b[b]) over `bins` equal-width bins
// spanning [min, max] of both lists together. Bins are half-open except the
// last, which also holds the maximum.
double DistributionOverlap(std::span<const double> a, std::span<const double> b,
                           int bins = kDefaultOverlapBins);

// Mean L2-norm difference (LGT minus HWT) per layer and per position counted
// from the end of the text (position 1 = last token).
struct Heatmap {
  LayerRange layers;
  uint32_t positions = 0;
  std::vector<double> cells;  // layer-major: (layer - lo) * positions + (p - 1)

  double At(uint32_t layer, uint32_t position) const {
    return cells[static_cast<size_t>(layer - layers.lo) * positions +
                 (position - 1)];
  }
};

// Positions run up to the shortest of the two classes' longest samples, so
// every cell averages over at least one sample per class. Samples shorter
// than a position are skipped for that position.
Heatmap ActivationHeatmap(std::span<const ActivationTensor* const> samples,
                          LayerRange layers);
Heatmap ActivationHeatmap(const DatasetManifest& manifest, LayerRange layers);

// "layer,position,delta_norm" followed by one row per cell.
std::string HeatmapToCsv(const Heatmap& heatmap);

}  // namespace probedet
