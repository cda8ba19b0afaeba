#include "probedet/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "probedet/errors.h"

namespace probedet {

double DistributionOverlap(std::span<const double> a, std::span<const double> b,
                           int bins) {
  if (bins < 1) Fail(ErrorCode::kArgument, "bin count must be >= 1");
  if (a.empty() || b.empty()) {
    Fail(ErrorCode::kArgument, "overlap needs two nonempty score lists");
  }
  double lo = a.front();
  double hi = a.front();
  for (auto list : {a, b}) {
    for (double x : list) {
      if (!std::isfinite(x)) Fail(ErrorCode::kArgument, "non-finite score");
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  auto histogram = [&](std::span<const double> xs) {
    std::vector<double> h(static_cast<size_t>(bins), 0.0);
    for (double x : xs) {
      int idx = 0;
      if (hi > lo) {
        idx = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
        idx = std::clamp(idx, 0, bins - 1);
      }
      h[static_cast<size_t>(idx)] += 1.0;
    }
    for (double& v : h) v /= static_cast<double>(xs.size());
    return h;
  };
  const auto ha = histogram(a);
  const auto hb = histogram(b);
  double overlap = 0.0;
  for (size_t i = 0; i < ha.size(); ++i) overlap += std::min(ha[i], hb[i]);
  return std::clamp(overlap, 0.0, 1.0);
}

Heatmap ActivationHeatmap(std::span<const ActivationTensor* const> samples,
                          LayerRange layers) {
  struct ClassAccum {
    std::vector<double> sums;
    std::vector<uint64_t> counts;
    uint32_t longest = 0;
    bool seen = false;
  };
  if (layers.lo < 1 || layers.lo > layers.hi) {
    Fail(ErrorCode::kArgument, "invalid layer range");
  }
  uint32_t dim = 0;
  uint32_t max_tokens = 0;
  for (const ActivationTensor* t : samples) {
    if (t->label() == Label::kUnknown) continue;
    if (dim == 0) dim = t->dim();
    if (t->dim() != dim) {
      Fail(ErrorCode::kShape, "heatmap samples must share hidden dim");
    }
    if (t->layers() < layers.hi) {
      Fail(ErrorCode::kShape, "sample '" + t->sample_id() +
                                  "' has fewer layers than the range");
    }
    max_tokens = std::max(max_tokens, t->tokens());
  }

  const size_t cells = static_cast<size_t>(layers.size()) * max_tokens;
  ClassAccum lgt{std::vector<double>(cells, 0.0),
                 std::vector<uint64_t>(cells, 0), 0, false};
  ClassAccum hwt = lgt;
  for (const ActivationTensor* t : samples) {
    if (t->label() == Label::kUnknown) continue;
    ClassAccum& acc = t->label() == Label::kLgt ? lgt : hwt;
    acc.seen = true;
    acc.longest = std::max(acc.longest, t->tokens());
    for (uint32_t l = layers.lo; l <= layers.hi; ++l) {
      for (uint32_t p = 1; p <= t->tokens(); ++p) {
        const auto h = t->At(l - 1, t->tokens() - p);
        double sq = 0.0;
        for (float v : h) sq += static_cast<double>(v) * v;
        const size_t cell = static_cast<size_t>(l - layers.lo) * max_tokens + p - 1;
        acc.sums[cell] += std::sqrt(sq);
        ++acc.counts[cell];
      }
    }
  }
  if (!lgt.seen || !hwt.seen) {
    Fail(ErrorCode::kArgument, "heatmap needs samples of both classes");
  }

  Heatmap out;
  out.layers = layers;
  out.positions = std::min(lgt.longest, hwt.longest);
  for (uint32_t l = layers.lo; l <= layers.hi; ++l) {
    for (uint32_t p = 1; p <= out.positions; ++p) {
      const size_t cell = static_cast<size_t>(l - layers.lo) * max_tokens + p - 1;
      out.cells.push_back(lgt.sums[cell] / static_cast<double>(lgt.counts[cell]) -
                          hwt.sums[cell] / static_cast<double>(hwt.counts[cell]));
    }
  }
  return out;
}

Heatmap ActivationHeatmap(const DatasetManifest& manifest, LayerRange layers) {
  std::vector<ActivationTensor> tensors;
  tensors.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    if (e.label == Label::kUnknown) continue;
    ActivationTensor t = ReadActivationFile(manifest.ResolvePath(e));
    // The manifest label is authoritative.
    tensors.emplace_back(t.sample_id(), e.label, t.layers(), t.tokens(), t.dim(),
                         std::vector<float>(t.values().begin(), t.values().end()));
  }
  std::vector<const ActivationTensor*> ptrs;
  for (const auto& t : tensors) ptrs.push_back(&t);
  return ActivationHeatmap(ptrs, layers);
}

std::string HeatmapToCsv(const Heatmap& heatmap) {
  std::ostringstream out;
  out.precision(17);
  out << "layer,position,delta_norm\n";
  for (uint32_t l = heatmap.layers.lo; l <= heatmap.layers.hi; ++l) {
    for (uint32_t p = 1; p <= heatmap.positions; ++p) {
      out << l << ',' << p << ',' << heatmap.At(l, p) << '\n';
    }
  }
  return out.str();
}

}  // namespace probedet
