#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "probedet/manifest.h"
#include "probedet/probing_model.h"
#include "probedet/tensor_store.h"

namespace probedet {

// Dense row-major matrix of doubles.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> Row(size_t r) {
    return std::span<double>(data).subspan(r * cols, cols);
  }
  std::span<const double> Row(size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
};

inline constexpr double kDefaultActivationRatio = 0.1;

// Number of trailing tokens kept: max(1, ceil(ratio * n)). Products that are
// integral up to rounding noise (e.g. 0.1 * 30) are not rounded up.
uint32_t WindowSize(uint32_t tokens, double ratio);

// Keeps the last WindowSize(n, ratio) tokens of every layer, order preserved.
ActivationTensor SelectActivationWindow(const ActivationTensor& tensor,
                                        double ratio);

struct TensorPair {
  const ActivationTensor* lgt = nullptr;
  const ActivationTensor* hwt = nullptr;
};

// One matrix per layer in `range`; rows are LGT - HWT at token positions
// aligned from the end and truncated to the shorter of the two windows.
struct PairDifferenceSet {
  LayerRange range;
  std::vector<Matrix> layers;
};

PairDifferenceSet ComputePairDifferences(std::span<const TensorPair> pairs,
                                         LayerRange range);

struct PcaResult {
  std::vector<double> direction;  // unit norm
  double eigenvalue = 0.0;        // population covariance convention
  std::vector<double> mean;
};

// Top principal component of the mean-centred rows. The returned direction
// has its largest-magnitude entry positive (first such index on ties). One
// row, or all rows identical, yields eigenvalue 0 and direction e_1.
PcaResult PcaFirstComponent(const Matrix& rows);

struct FitConfig {
  double ratio = kDefaultActivationRatio;
  std::optional<LayerRange> layers;  // default: every layer of the data
};

// Fits from unwindowed tensors. Each pair contributes its aligned difference
// rows once with each sign, so the centred PCA sees a zero-mean cloud whose
// covariance is the second moment of the raw differences.
ProbingModel FitProbingModel(std::span<const TensorPair> pairs,
                             const FitConfig& config);

// Loads every paired entry of a strictly-paired manifest and fits.
ProbingModel FitProbingModel(const DatasetManifest& manifest,
                             const FitConfig& config);

struct LoadedPairs {
  LoadedPairs() = default;
  LoadedPairs(LoadedPairs&&) = default;
  LoadedPairs& operator=(LoadedPairs&&) = default;
  LoadedPairs(const LoadedPairs&) = delete;
  LoadedPairs& operator=(const LoadedPairs&) = delete;

  std::vector<ActivationTensor> tensors;
  std::vector<TensorPair> pairs;  // points into `tensors`
  std::vector<std::string> pair_ids;
};

// Reads both members of every pair in manifest order. Throws
// INVALID_MANIFEST on violations and EMPTY_DATASET when no pair exists.
LoadedPairs LoadPairs(const DatasetManifest& manifest);

}  // namespace probedet
