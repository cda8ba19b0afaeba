#include "probedet/feature_model.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "probedet/errors.h"
#include "probedet/scoring.h"
#include "probedet/symmetric_eigen.h"

namespace probedet {

uint32_t WindowSize(uint32_t tokens, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    Fail(ErrorCode::kArgument, "activation ratio must lie in (0, 1], got " +
                                   std::to_string(ratio));
  }
  const double exact = ratio * static_cast<double>(tokens);
  const double nearest = std::round(exact);
  double w = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)
                 ? nearest
                 : std::ceil(exact);
  w = std::clamp(w, 1.0, static_cast<double>(tokens));
  return static_cast<uint32_t>(w);
}

ActivationTensor SelectActivationWindow(const ActivationTensor& tensor,
                                        double ratio) {
  const uint32_t n = tensor.tokens();
  const uint32_t w = WindowSize(n, ratio);
  if (w == n) return tensor;
  const uint32_t d = tensor.dim();
  std::vector<float> values;
  values.reserve(static_cast<size_t>(tensor.layers()) * w * d);
  for (uint32_t l = 0; l < tensor.layers(); ++l) {
    for (uint32_t t = n - w; t < n; ++t) {
      const auto h = tensor.At(l, t);
      values.insert(values.end(), h.begin(), h.end());
    }
  }
  return ActivationTensor(tensor.sample_id(), tensor.label(), tensor.layers(),
                          w, d, std::move(values));
}

namespace {

void CheckPairShapes(std::span<const TensorPair> pairs, LayerRange range) {
  if (pairs.empty()) {
    Fail(ErrorCode::kArgument, "pair list is empty");
  }
  const uint32_t d = pairs.front().lgt->dim();
  const uint32_t layers = pairs.front().lgt->layers();
  for (const auto& p : pairs) {
    for (const ActivationTensor* t : {p.lgt, p.hwt}) {
      if (t->dim() != d || t->layers() != layers) {
        Fail(ErrorCode::kShape, "sample '" + t->sample_id() +
                                    "' does not share layer count and dim "
                                    "with the rest of the dataset");
      }
    }
  }
  if (range.lo < 1 || range.lo > range.hi || range.hi > layers) {
    Fail(ErrorCode::kShape, "layer range [" + std::to_string(range.lo) + ", " +
                                std::to_string(range.hi) +
                                "] is outside the data's " +
                                std::to_string(layers) + " layers");
  }
}

// Aligned difference rows of one 0-based layer.
Matrix LayerDifferences(std::span<const TensorPair> pairs, uint32_t layer) {
  const size_t d = pairs.front().lgt->dim();
  size_t rows = 0;
  for (const auto& p : pairs) {
    rows += std::min(p.lgt->tokens(), p.hwt->tokens());
  }
  Matrix out(rows, d);
  size_t r = 0;
  for (const auto& p : pairs) {
    const uint32_t m = std::min(p.lgt->tokens(), p.hwt->tokens());
    const uint32_t lgt_start = p.lgt->tokens() - m;
    const uint32_t hwt_start = p.hwt->tokens() - m;
    for (uint32_t j = 0; j < m; ++j, ++r) {
      const auto a = p.lgt->At(layer, lgt_start + j);
      const auto b = p.hwt->At(layer, hwt_start + j);
      auto row = out.Row(r);
      for (size_t k = 0; k < d; ++k) {
        row[k] = static_cast<double>(a[k]) - static_cast<double>(b[k]);
      }
    }
  }
  return out;
}

void OrientBySign(std::vector<double>& v) {
  size_t best = 0;
  for (size_t k = 1; k < v.size(); ++k) {
    if (std::abs(v[k]) > std::abs(v[best])) best = k;
  }
  if (v[best] < 0) {
    for (double& x : v) x = -x;
  }
}

void Normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

}  // namespace

PairDifferenceSet ComputePairDifferences(std::span<const TensorPair> pairs,
                                         LayerRange range) {
  CheckPairShapes(pairs, range);
  PairDifferenceSet out;
  out.range = range;
  for (uint32_t l = range.lo; l <= range.hi; ++l) {
    out.layers.push_back(LayerDifferences(pairs, l - 1));
  }
  return out;
}

PcaResult PcaFirstComponent(const Matrix& rows) {
  if (rows.rows == 0 || rows.cols == 0) {
    Fail(ErrorCode::kArgument, "PCA needs at least one row and one column");
  }
  for (double x : rows.data) {
    if (!std::isfinite(x)) {
      Fail(ErrorCode::kArgument, "PCA input contains non-finite values");
    }
  }
  const size_t n = rows.rows;
  const size_t d = rows.cols;

  PcaResult out;
  out.mean.assign(d, 0.0);
  for (size_t r = 0; r < n; ++r) {
    const auto row = rows.Row(r);
    for (size_t k = 0; k < d; ++k) out.mean[k] += row[k];
  }
  for (double& m : out.mean) m /= static_cast<double>(n);

  bool identical = true;
  for (size_t r = 1; r < n && identical; ++r) {
    identical = std::memcmp(rows.Row(r).data(), rows.Row(0).data(),
                            d * sizeof(double)) == 0;
  }
  auto degenerate = [&] {
    out.direction.assign(d, 0.0);
    out.direction[0] = 1.0;
    out.eigenvalue = 0.0;
    return out;
  };
  if (identical) return degenerate();

  Matrix centered(n, d);
  for (size_t r = 0; r < n; ++r) {
    const auto src = rows.Row(r);
    auto dst = centered.Row(r);
    for (size_t k = 0; k < d; ++k) dst[k] = src[k] - out.mean[k];
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  if (n >= d) {
    // d x d covariance.
    std::vector<double> cov(d * d, 0.0);
    for (size_t r = 0; r < n; ++r) {
      const auto x = centered.Row(r);
      for (size_t i = 0; i < d; ++i) {
        const double xi = x[i];
        for (size_t j = 0; j <= i; ++j) cov[i * d + j] += xi * x[j];
      }
    }
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = 0; j <= i; ++j) {
        cov[i * d + j] *= inv_n;
        cov[j * d + i] = cov[i * d + j];
      }
    }
    const auto eig = SolveSymmetric(std::move(cov), d);
    out.eigenvalue = eig.values.back();
    out.direction.resize(d);
    for (size_t i = 0; i < d; ++i) out.direction[i] = eig.vectors[i * d + d - 1];
  } else {
    // n x n Gram matrix shares the nonzero spectrum; map back via X^T w.
    std::vector<double> gram(n * n, 0.0);
    for (size_t a = 0; a < n; ++a) {
      const auto xa = centered.Row(a);
      for (size_t b = 0; b <= a; ++b) {
        const auto xb = centered.Row(b);
        double s = 0.0;
        for (size_t k = 0; k < d; ++k) s += xa[k] * xb[k];
        gram[a * n + b] = s * inv_n;
        gram[b * n + a] = s * inv_n;
      }
    }
    const auto eig = SolveSymmetric(std::move(gram), n);
    out.eigenvalue = eig.values.back();
    out.direction.assign(d, 0.0);
    for (size_t r = 0; r < n; ++r) {
      const double w = eig.vectors[r * n + n - 1];
      const auto x = centered.Row(r);
      for (size_t k = 0; k < d; ++k) out.direction[k] += w * x[k];
    }
  }
  if (!(out.eigenvalue > 0.0)) return degenerate();
  Normalize(out.direction);
  OrientBySign(out.direction);
  return out;
}

ProbingModel FitProbingModel(std::span<const TensorPair> pairs,
                             const FitConfig& config) {
  if (pairs.empty()) {
    Fail(ErrorCode::kEmptyDataset, "no usable HWT/LGT pairs to fit");
  }
  const LayerRange range =
      config.layers.value_or(LayerRange{1, pairs.front().lgt->layers()});
  CheckPairShapes(pairs, range);

  std::vector<ActivationTensor> windows;
  windows.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    windows.push_back(SelectActivationWindow(*p.lgt, config.ratio));
    windows.push_back(SelectActivationWindow(*p.hwt, config.ratio));
  }
  std::vector<TensorPair> windowed(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    windowed[i] = {&windows[2 * i], &windows[2 * i + 1]};
  }

  ProbingModel model;
  model.layer_range = range;
  model.dim = pairs.front().lgt->dim();
  model.fit_stats.pair_count = pairs.size();
  model.fit_stats.activation_ratio = config.ratio;

  for (uint32_t l = range.lo; l <= range.hi; ++l) {
    const Matrix diffs = LayerDifferences(windowed, l - 1);
    Matrix symmetric(diffs.rows * 2, diffs.cols);
    for (size_t r = 0; r < diffs.rows; ++r) {
      const auto src = diffs.Row(r);
      auto pos = symmetric.Row(2 * r);
      auto neg = symmetric.Row(2 * r + 1);
      for (size_t k = 0; k < diffs.cols; ++k) {
        pos[k] = src[k];
        neg[k] = -src[k];
      }
    }
    PcaResult pca = PcaFirstComponent(symmetric);

    std::vector<double> raw_mean(diffs.cols, 0.0);
    for (size_t r = 0; r < diffs.rows; ++r) {
      const auto row = diffs.Row(r);
      for (size_t k = 0; k < diffs.cols; ++k) raw_mean[k] += row[k];
    }
    for (double& m : raw_mean) m /= static_cast<double>(diffs.rows);

    // Orient so LGT tokens project higher than HWT tokens on average.
    double lgt_sum = 0.0;
    double hwt_sum = 0.0;
    size_t lgt_count = 0;
    size_t hwt_count = 0;
    for (const auto& p : windowed) {
      for (uint32_t t = 0; t < p.lgt->tokens(); ++t, ++lgt_count) {
        const auto h = p.lgt->At(l - 1, t);
        for (size_t k = 0; k < h.size(); ++k) lgt_sum += h[k] * pca.direction[k];
      }
      for (uint32_t t = 0; t < p.hwt->tokens(); ++t, ++hwt_count) {
        const auto h = p.hwt->At(l - 1, t);
        for (size_t k = 0; k < h.size(); ++k) hwt_sum += h[k] * pca.direction[k];
      }
    }
    if (lgt_sum / lgt_count < hwt_sum / hwt_count) {
      for (double& x : pca.direction) x = -x;
    }

    model.fit_stats.difference_rows = diffs.rows;
    model.vectors.push_back(std::move(pca.direction));
    model.means.push_back(std::move(raw_mean));
    model.explained_variance.push_back(pca.eigenvalue);
  }
  model.orientation_applied = true;

  double lgt_total = 0.0;
  double hwt_total = 0.0;
  for (const auto& p : windowed) {
    lgt_total += TextScore(*p.lgt, model, 1.0);
    hwt_total += TextScore(*p.hwt, model, 1.0);
  }
  const double count = static_cast<double>(windowed.size());
  model.fit_stats.mean_score_lgt = lgt_total / count;
  model.fit_stats.mean_score_hwt = hwt_total / count;
  model.fit_stats.degenerate =
      !(model.fit_stats.mean_score_lgt > model.fit_stats.mean_score_hwt);
  return model;
}

LoadedPairs LoadPairs(const DatasetManifest& manifest) {
  const auto violations = ValidateManifest(manifest, /*strict_pairs=*/true);
  if (!violations.empty()) {
    Fail(ErrorCode::kInvalidManifest,
         "manifest is invalid: " + violations.front() +
             (violations.size() > 1
                  ? " (and " + std::to_string(violations.size() - 1) + " more)"
                  : ""));
  }
  const auto pairs = CollectPairs(manifest);
  if (pairs.empty()) {
    Fail(ErrorCode::kEmptyDataset, "manifest contains no HWT/LGT pairs");
  }
  LoadedPairs out;
  out.tensors.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    for (const ManifestEntry* e : {p.lgt, p.hwt}) {
      ActivationTensor t = ReadActivationFile(manifest.ResolvePath(*e));
      if (t.label() != Label::kUnknown && t.label() != e->label) {
        Fail(ErrorCode::kInvalidManifest,
             "file '" + e->file + "' is labelled " +
                 std::string(LabelName(t.label())) + " but the manifest says " +
                 std::string(LabelName(e->label)));
      }
      out.tensors.push_back(std::move(t));
    }
    out.pair_ids.push_back(p.pair_id);
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    out.pairs.push_back({&out.tensors[2 * i], &out.tensors[2 * i + 1]});
  }
  return out;
}

ProbingModel FitProbingModel(const DatasetManifest& manifest,
                             const FitConfig& config) {
  const LoadedPairs loaded = LoadPairs(manifest);
  return FitProbingModel(loaded.pairs, config);
}

}  // namespace probedet
