#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "probedet/tensor_store.h"

namespace probedet {

struct FitStats {
  uint64_t pair_count = 0;
  uint64_t difference_rows = 0;  // per layer, before sign symmetrization
  double activation_ratio = 0.1;
  double mean_score_hwt = 0.0;
  double mean_score_lgt = 0.0;
  // Set when the fit cannot separate the classes (e.g. every pair identical).
  bool degenerate = false;
  // Recorded interpretation choices for auditability.
  std::string row_mode = "per_aligned_token";
  std::string centering = "sign_symmetrized";
};

// Per-layer unit probing directions, immutable after fitting. Index i of
// every per-layer vector corresponds to layer layer_range.lo + i.
struct ProbingModel {
  LayerRange layer_range;
  uint32_t dim = 0;
  std::vector<std::vector<double>> vectors;
  // Mean of the raw difference rows per layer; informational only, scoring
  // projects raw activations.
  std::vector<std::vector<double>> means;
  std::vector<double> explained_variance;
  bool orientation_applied = false;
  FitStats fit_stats;

  uint32_t layer_count() const { return layer_range.size(); }
};

}  // namespace probedet
