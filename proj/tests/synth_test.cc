#include "probedet/synth.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "probedet/metrics.h"
#include "probedet/scoring.h"
#include "test_util.h"

namespace probedet {
namespace {

using testing::CodeOf;

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

SynthSpec Small(uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  spec.pair_count = 6;
  spec.dim = 5;
  spec.layers = 3;
  spec.tokens = 7;
  return spec;
}

TEST(SynthTest, ValidatesSpec) {
  SynthSpec s = Small(1);
  s.noise_std = 0.0;
  EXPECT_EQ(CodeOf([&] { ValidateSynthSpec(s); }), ErrorCode::kArgument);
  s = Small(1);
  s.shift = -1.0;
  EXPECT_EQ(CodeOf([&] { ValidateSynthSpec(s); }), ErrorCode::kArgument);
  s = Small(1);
  s.dim = 0;
  EXPECT_EQ(CodeOf([&] { ValidateSynthSpec(s); }), ErrorCode::kArgument);
  s = Small(1);
  s.layer_mask = std::vector<bool>{true};
  EXPECT_EQ(CodeOf([&] { ValidateSynthSpec(s); }), ErrorCode::kArgument);
}

TEST(SynthTest, StructureAndManifest) {
  const SynthDataset data = Synthesize(Small(2));
  ASSERT_EQ(data.tensors.size(), 12u);
  EXPECT_EQ(data.tensors[0].label(), Label::kLgt);
  EXPECT_EQ(data.tensors[1].label(), Label::kHwt);
  EXPECT_EQ(data.tensors[0].sample_id(), "p00000-lgt");
  ASSERT_EQ(data.directions.size(), 3u);
  for (const auto& u : data.directions) EXPECT_NEAR(Dot(u, u), 1.0, 1e-12);
  EXPECT_TRUE(ValidateManifest(data.manifest, true).empty());
  EXPECT_EQ(data.manifest.layer_range, (LayerRange{1, 3}));
  EXPECT_EQ(data.Pairs().size(), 6u);
  EXPECT_EQ(data.Pairs(2, 3).size(), 3u);
  EXPECT_EQ(data.Pairs(2, 3)[0].lgt, &data.tensors[4]);
}

TEST(SynthTest, ZeroShiftFullDifferenceIsJitterOnly) {
  SynthSpec spec = Small(3);
  spec.shift = 0.0;
  spec.noise_std = 2.0;
  spec.pair_count = 50;
  const SynthDataset data = Synthesize(spec);
  double sum = 0.0, sq = 0.0, count = 0.0;
  for (size_t i = 0; i < data.tensors.size(); i += 2) {
    const auto& a = data.tensors[i].values();
    const auto& b = data.tensors[i + 1].values();
    for (size_t k = 0; k < a.size(); ++k) {
      const double d = static_cast<double>(a[k]) - b[k];
      sum += d;
      sq += d * d;
      count += 1.0;
    }
  }
  const double mean = sum / count;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(std::sqrt(sq / count - mean * mean), 0.5, 0.02);  // sigma / 4
}

TEST(SynthTest, BasisModeAndMask) {
  SynthSpec spec = Small(4);
  spec.direction_mode = DirectionMode::kBasis;
  spec.layer_mask = std::vector<bool>{false, true, false};
  spec.shift = 100.0;
  spec.noise_std = 0.01;
  const SynthDataset data = Synthesize(spec);
  for (const auto& u : data.directions) {
    int ones = 0;
    for (double x : u) ones += (x == 1.0);
    EXPECT_EQ(ones, 1);
  }
  const auto& lgt = data.tensors[0];
  const auto& hwt = data.tensors[1];
  for (uint32_t l = 0; l < 3; ++l) {
    double gap = 0.0;
    for (uint32_t k = 0; k < 5; ++k) {
      gap += (lgt.At(l, 0)[k] - hwt.At(l, 0)[k]) * data.directions[l][k];
    }
    if (l == 1) {
      EXPECT_NEAR(gap, 100.0, 0.1);
    } else {
      EXPECT_NEAR(gap, 0.0, 0.1);
    }
  }
}

TEST(SynthTest, FilesAreByteIdenticalAcrossRuns) {
  testing::TempDir a, b;
  const SynthSpec spec = Small(5);
  GenerateSynthetic(spec, a.path().string());
  GenerateSynthetic(spec, b.path().string());
  size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    const auto name = entry.path().filename().string();
    EXPECT_EQ(internal_test::Slurp(entry.path().string()),
              internal_test::Slurp(b.File(name)))
        << name;
    ++files;
  }
  EXPECT_EQ(files, 13u);  // 12 tensors + manifest.json
  const DatasetManifest m = LoadManifest(a.File("manifest.json"));
  EXPECT_EQ(ReadActivationFile(m.ResolvePath(m.entries[3])),
            Synthesize(spec).tensors[3]);
}

TEST(SynthTest, DifferentSeedsDiffer) {
  EXPECT_NE(Synthesize(Small(6)).tensors[0], Synthesize(Small(7)).tensors[0]);
}

TEST(SynthTest, FittedVectorsAlignWithPlantedDirections) {
  SynthSpec spec;
  spec.seed = 8;
  spec.pair_count = 256;
  spec.dim = 64;
  spec.layers = 8;
  spec.tokens = 32;
  spec.shift = 1.0;
  spec.noise_std = 1.0;
  const SynthDataset data = Synthesize(spec);
  const ProbingModel model = FitProbingModel(data.Pairs(), {});
  for (size_t l = 0; l < 8; ++l) {
    EXPECT_GE(Dot(model.vectors[l], data.directions[l]), 0.95) << "layer " << l;
  }
}

TEST(SynthTest, ZeroShiftAurocNearChance) {
  double total = 0.0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    SynthSpec spec;
    spec.seed = 100 + seed;
    spec.pair_count = 400;
    spec.dim = 16;
    spec.layers = 4;
    spec.tokens = 20;
    spec.shift = 0.0;
    const SynthDataset data = Synthesize(spec);
    const ProbingModel model = FitProbingModel(data.Pairs(0, 200), {});
    std::vector<double> scores;
    std::vector<Label> labels;
    for (size_t i = 400; i < 800; ++i) {
      scores.push_back(TextScore(data.tensors[i], model));
      labels.push_back(data.tensors[i].label());
    }
    total += Auroc(scores, labels);
  }
  const double mean = total / 5.0;
  EXPECT_GE(mean, 0.45);
  EXPECT_LE(mean, 0.55);
}

}  // namespace
}  // namespace probedet
