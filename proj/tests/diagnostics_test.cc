#include "probedet/diagnostics.h"

#include <gtest/gtest.h>

#include <cmath>

#include "probedet/synth.h"
#include "test_util.h"

namespace probedet {
namespace {

using testing::CodeOf;

TEST(OverlapTest, IdenticalListsOverlapFully) {
  const std::vector<double> a = {0.1, 0.5, 0.5, 2.0, 3.3};
  EXPECT_DOUBLE_EQ(DistributionOverlap(a, a), 1.0);
  EXPECT_DOUBLE_EQ(DistributionOverlap(a, a, 1), 1.0);
}

TEST(OverlapTest, DisjointRangesDoNotOverlap) {
  const std::vector<double> a = {0.0, 0.5, 1.0};
  const std::vector<double> b = {5.0, 6.0};
  EXPECT_EQ(DistributionOverlap(a, b, 10), 0.0);
}

TEST(OverlapTest, HandComputedTwoBins) {
  // Bins [0,1) and [1,2]: a -> (2/3, 1/3), b -> (0, 1).
  const std::vector<double> a = {0, 0, 1};
  const std::vector<double> b = {1, 2, 2};
  EXPECT_DOUBLE_EQ(DistributionOverlap(a, b, 2), 1.0 / 3.0);
}

TEST(OverlapTest, ConstantScoresShareOneBin) {
  const std::vector<double> a = {2, 2};
  const std::vector<double> b = {2};
  EXPECT_DOUBLE_EQ(DistributionOverlap(a, b, 7), 1.0);
}

TEST(OverlapTest, SymmetricAndAffineInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) a.push_back(static_cast<double>(rng.Index(16)));
    for (int i = 0; i < 25; ++i) b.push_back(static_cast<double>(rng.Index(16)) + 4);
    const int bins = 1 + static_cast<int>(rng.Index(8));
    const double base = DistributionOverlap(a, b, bins);
    EXPECT_EQ(base, DistributionOverlap(b, a, bins));
    // Power-of-two scale and integer offset keep every bin edge exact.
    auto affine = [](std::vector<double> xs) {
      for (double& x : xs) x = 4.0 * x - 3.0;
      return xs;
    };
    EXPECT_EQ(base, DistributionOverlap(affine(a), affine(b), bins));
  }
}

TEST(OverlapTest, Errors) {
  const std::vector<double> a = {1.0};
  EXPECT_EQ(CodeOf([&] { DistributionOverlap(a, a, 0); }), ErrorCode::kArgument);
  EXPECT_EQ(CodeOf([&] { DistributionOverlap(a, {}, 3); }), ErrorCode::kArgument);
}

std::vector<const ActivationTensor*> Pointers(const SynthDataset& data) {
  std::vector<const ActivationTensor*> out;
  for (const auto& t : data.tensors) out.push_back(&t);
  return out;
}

TEST(HeatmapTest, IdenticalClassesGiveZeros) {
  Rng rng(2);
  const auto h = testing::RandomTensor(rng, 3, 5, 4, Label::kHwt, "h");
  ActivationTensor l("l", Label::kLgt, 3, 5, 4,
                     std::vector<float>(h.values().begin(), h.values().end()));
  const ActivationTensor* samples[] = {&l, &h};
  const Heatmap map = ActivationHeatmap(samples, {1, 3});
  EXPECT_EQ(map.positions, 5u);
  ASSERT_EQ(map.cells.size(), 15u);
  for (double c : map.cells) EXPECT_EQ(c, 0.0);
}

TEST(HeatmapTest, PositionsCountFromTheEnd) {
  // One layer, d = 1: LGT norms 1,2,3 (last = 3); HWT norms 0,0 (shorter).
  const ActivationTensor l("l", Label::kLgt, 1, 3, 1, {1, 2, 3});
  const ActivationTensor h("h", Label::kHwt, 1, 2, 1, {0, 0});
  const ActivationTensor* samples[] = {&l, &h};
  const Heatmap map = ActivationHeatmap(samples, {1, 1});
  ASSERT_EQ(map.positions, 2u);
  EXPECT_EQ(map.At(1, 1), 3.0);
  EXPECT_EQ(map.At(1, 2), 2.0);
}

TEST(HeatmapTest, ShiftOnOneLayerConcentratesThere) {
  SynthSpec spec;
  spec.seed = 3;
  spec.pair_count = 200;
  spec.dim = 16;
  spec.layers = 5;
  spec.tokens = 6;
  spec.shift = 3.0;
  spec.layer_mask = std::vector<bool>{false, false, true, false, false};
  const SynthDataset data = Synthesize(spec);
  const Heatmap map = ActivationHeatmap(Pointers(data), {1, 5});
  for (uint32_t p = 1; p <= 6; ++p) {
    const double on = map.At(3, p);
    for (uint32_t layer : {1u, 2u, 4u, 5u}) {
      EXPECT_GT(on, 5.0 * std::abs(map.At(layer, p))) << layer << "," << p;
    }
  }
}

TEST(HeatmapTest, FullMaskShiftIsPositiveEverywhere) {
  SynthSpec spec;
  spec.seed = 4;
  spec.pair_count = 200;
  spec.dim = 16;
  spec.layers = 4;
  spec.tokens = 8;
  spec.shift = 1.0;
  const SynthDataset data = Synthesize(spec);
  const Heatmap map = ActivationHeatmap(Pointers(data), {1, 4});
  for (double c : map.cells) EXPECT_GT(c, 0.0);
}

TEST(HeatmapTest, CsvAndErrors) {
  const ActivationTensor l("l", Label::kLgt, 2, 1, 1, {1, 2});
  const ActivationTensor h("h", Label::kHwt, 2, 1, 1, {0, 0});
  const ActivationTensor* samples[] = {&l, &h};
  const std::string csv = HeatmapToCsv(ActivationHeatmap(samples, {1, 2}));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "layer,position,delta_norm");
  EXPECT_NE(csv.find("\n2,1,2"), std::string::npos);
  const ActivationTensor* only_lgt[] = {&l};
  EXPECT_EQ(CodeOf([&] { ActivationHeatmap(only_lgt, {1, 1}); }),
            ErrorCode::kArgument);
  EXPECT_EQ(CodeOf([&] { ActivationHeatmap(samples, {1, 3}); }), ErrorCode::kShape);
}

TEST(HeatmapTest, FromManifest) {
  testing::TempDir dir;
  SynthSpec spec;
  spec.seed = 5;
  spec.pair_count = 4;
  spec.dim = 3;
  spec.layers = 2;
  spec.tokens = 3;
  const DatasetManifest m = GenerateSynthetic(spec, dir.path().string());
  const SynthDataset data = Synthesize(spec);
  EXPECT_EQ(ActivationHeatmap(m, {1, 2}).cells,
            ActivationHeatmap(Pointers(data), {1, 2}).cells);
}

}  // namespace
}  // namespace probedet
