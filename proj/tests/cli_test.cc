#include "probedet/commands.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "probedet/engine_config.h"
#include "probedet/synth.h"
#include "test_util.h"

namespace probedet {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::CodeOf;
using internal_test::Slurp;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;

  json Error() const { return json::parse(err).at("error"); }
  std::vector<json> Lines() const {
    std::vector<json> lines;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);) lines.push_back(json::parse(line));
    return lines;
  }
};

CliRun Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir();
    SynthSpec spec;
    spec.seed = 17;
    spec.pair_count = 48;
    spec.dim = 64;
    spec.layers = 8;
    spec.tokens = 32;
    spec.shift = 1.0;
    GenerateSynthetic(spec, dir_->File("data"));
    manifest_ = new std::string(dir_->File("data/manifest.json"));
    model_ = new std::string(dir_->File("model.rgpm"));
    const CliRun fit = Cli({"fit", "--manifest", *manifest_, "--out", *model_});
    ASSERT_EQ(fit.code, 0) << fit.err;
  }
  static void TearDownTestSuite() {
    delete model_;
    delete manifest_;
    delete dir_;
  }

  static testing::TempDir* dir_;
  static std::string* manifest_;
  static std::string* model_;
};

testing::TempDir* CliTest::dir_ = nullptr;
std::string* CliTest::manifest_ = nullptr;
std::string* CliTest::model_ = nullptr;

TEST_F(CliTest, FitWritesModelCalibrationAndSummary) {
  const std::string model = dir_->File("fit_a.rgpm");
  const CliRun r = Cli({"fit", "--manifest", *manifest_, "--out", model,
                        "--metrics-out", dir_->File("fit_metrics.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(model));
  EXPECT_TRUE(fs::exists(CalibrationPathFor(model)));
  const json summary = json::parse(r.out);
  EXPECT_GE(summary["train_auroc"].get<double>(), 0.99);
  EXPECT_GT(summary["mean_score_lgt"].get<double>(),
            summary["mean_score_hwt"].get<double>());
  EXPECT_EQ(summary["pair_count"], 48);
  EXPECT_EQ(summary["layer_range"], (json{1, 8}));
  EXPECT_TRUE(summary["tpr_at_fpr"].contains("0.01"));
  const json metrics = json::parse(Slurp(dir_->File("fit_metrics.json")));
  EXPECT_EQ(metrics["auroc"], summary["train_auroc"]);
}

TEST_F(CliTest, FitIsByteIdenticalOnRerun) {
  const std::string a = dir_->File("rerun_a.rgpm");
  const std::string b = dir_->File("rerun_b.rgpm");
  ASSERT_EQ(Cli({"fit", "--manifest", *manifest_, "--out", a}).code, 0);
  ASSERT_EQ(Cli({"fit", "--manifest", *manifest_, "--out", b}).code, 0);
  EXPECT_EQ(Slurp(a), Slurp(b));
  EXPECT_EQ(Slurp(CalibrationPathFor(a)), Slurp(CalibrationPathFor(b)));
  EXPECT_EQ(Slurp(a), Slurp(*model_));
}

TEST_F(CliTest, FitHonoursLayersAndRatio) {
  const std::string model = dir_->File("sub.rgpm");
  const CliRun r = Cli({"fit", "--manifest", *manifest_, "--out", model,
                        "--layers", "3:5", "--ratio", "0.25"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json summary = json::parse(r.out);
  EXPECT_EQ(summary["layer_range"], (json{3, 5}));
  EXPECT_EQ(summary["activation_ratio"], 0.25);
}

TEST_F(CliTest, EmptyManifestIsEmptyDataset) {
  const std::string path = dir_->File("empty.json");
  WriteFile(path, R"({"dataset_name": "empty", "surrogate_id": "none",
      "tokenizer_id": "none", "activation_ratio": 0.1, "layer_range": [1, 1],
      "entries": []})");
  const CliRun r = Cli({"fit", "--manifest", path, "--out", dir_->File("e.rgpm")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.Error()["code"], "EMPTY_DATASET");
  EXPECT_FALSE(fs::exists(dir_->File("e.rgpm")));
}

TEST_F(CliTest, BrokenManifestIsInvalidManifest) {
  const std::string path = dir_->File("broken.json");
  WriteFile(path, "[1, 2]");
  const CliRun r = Cli({"fit", "--manifest", path, "--out", dir_->File("b.rgpm")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.Error()["code"], "INVALID_MANIFEST");
}

TEST_F(CliTest, DetectVerdictsFollowCalibratedThreshold) {
  const CliRun r = Cli({"detect", "--model", *model_, "--input", dir_->File("data")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = r.Lines();
  ASSERT_EQ(lines.size(), 96u);
  int lgt_verdicts = 0;
  int correct = 0;
  for (const json& line : lines) {
    const double score = line["represcore"].get<double>();
    const double theta = line["threshold"].get<double>();
    const std::string verdict = line["verdict"];
    EXPECT_EQ(verdict, score > theta ? "LGT" : "HWT");
    lgt_verdicts += verdict == "LGT";
    const std::string id = line["sample_id"];
    correct += (id.ends_with("-lgt") == (verdict == "LGT"));
  }
  EXPECT_GT(lgt_verdicts, 0);
  EXPECT_GE(correct, 94);
}

TEST_F(CliTest, ThresholdOverrideForcesHwt) {
  const CliRun r = Cli({"detect", "--model", *model_, "--input", dir_->File("data"),
                        "--threshold", "1e9"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const json& line : r.Lines()) {
    EXPECT_EQ(line["verdict"], "HWT");
    EXPECT_EQ(line["threshold"].get<double>(), 1e9);
  }
}

TEST_F(CliTest, DirectoryOfTenGivesTenSortedLines) {
  const std::string batch = dir_->File("batch");
  fs::create_directories(batch);
  std::vector<std::string> names;
  for (int i = 9; i >= 0; --i) {
    const std::string name = "s" + std::to_string(i) + ".rgaf";
    fs::copy_file(dir_->File("data/p0000" + std::to_string(i) + "-hwt.rgaf"),
                  batch + "/" + name);
    names.push_back(name);
  }
  WriteFile(batch + "/notes.txt", "ignored");
  const CliRun r = Cli({"detect", "--model", *model_, "--input", batch});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = r.Lines();
  ASSERT_EQ(lines.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(lines[i]["sample_id"], "p0000" + std::to_string(i) + "-hwt");
  }
}

TEST_F(CliTest, UncalibratedModelReportsNullVerdict) {
  const std::string model = dir_->File("bare.rgpm");
  fs::copy_file(*model_, model);
  const CliRun r = Cli({"detect", "--model", model, "--input",
                        dir_->File("data/p00000-lgt.rgaf")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = r.Lines();
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_TRUE(lines[0]["verdict"].is_null());
  EXPECT_TRUE(lines[0]["threshold"].is_null());
}

TEST_F(CliTest, ShapeMismatchExitsTwo) {
  Rng rng(1);
  const std::string path = dir_->File("narrow.rgaf");
  WriteActivationFile(testing::RandomTensor(rng, 8, 4, 3), path);
  const CliRun r = Cli({"detect", "--model", *model_, "--input", path});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.Error()["code"], "SHAPE_MISMATCH");
}

TEST_F(CliTest, UnreadableInputsExitOne) {
  const CliRun missing =
      Cli({"detect", "--model", *model_, "--input", dir_->File("nope.rgaf")});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(missing.Error()["code"], "IO_ERROR");

  const std::string bad = dir_->File("bad.rgaf");
  WriteFile(bad, "RGAX-not-a-tensor");
  const CliRun format = Cli({"detect", "--model", *model_, "--input", bad});
  EXPECT_EQ(format.code, 1);
  EXPECT_EQ(format.Error()["code"], "FORMAT_ERROR");

  const CliRun model = Cli({"detect", "--model", bad, "--input", bad});
  EXPECT_EQ(model.code, 1);
  EXPECT_EQ(model.Error()["code"], "FORMAT_ERROR");
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  const std::string cfg = dir_->File("cfg.json");
  WriteFile(cfg, R"({"ratio": 0.5, "layers": "2:4", "fpr_level": 0.05})");
  const CliRun from_file = Cli({"fit", "--manifest", *manifest_, "--out",
                                dir_->File("cfg.rgpm"), "--config", cfg});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  const json a = json::parse(from_file.out);
  EXPECT_EQ(a["activation_ratio"], 0.5);
  EXPECT_EQ(a["layer_range"], (json{2, 4}));
  EXPECT_TRUE(a["tpr_at_fpr"].contains("0.05"));

  const CliRun overridden = Cli({"fit", "--manifest", *manifest_, "--out",
                                 dir_->File("cfg2.rgpm"), "--config", cfg,
                                 "--ratio", "0.2"});
  ASSERT_EQ(overridden.code, 0);
  EXPECT_EQ(json::parse(overridden.out)["activation_ratio"], 0.2);
}

TEST_F(CliTest, ConfigRejectsUnknownKeysAndBadValues) {
  const std::string cfg = dir_->File("unknown.json");
  WriteFile(cfg, R"({"ratio": 0.5, "ratoi": 0.1})");
  const CliRun r = Cli({"fit", "--manifest", *manifest_, "--out",
                        dir_->File("u.rgpm"), "--config", cfg});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.Error()["code"], "CONFIG_ERROR");

  const CliRun ratio = Cli({"fit", "--manifest", *manifest_, "--out",
                            dir_->File("u.rgpm"), "--ratio", "1.5"});
  EXPECT_EQ(ratio.code, 1);
  EXPECT_EQ(ratio.Error()["code"], "CONFIG_ERROR");

  const CliRun layers = Cli({"fit", "--manifest", *manifest_, "--out",
                             dir_->File("u.rgpm"), "--layers", "5:2"});
  EXPECT_EQ(layers.code, 1);
  EXPECT_EQ(layers.Error()["code"], "CONFIG_ERROR");

  const CliRun beyond = Cli({"fit", "--manifest", *manifest_, "--out",
                             dir_->File("u.rgpm"), "--layers", "1:9"});
  EXPECT_EQ(beyond.code, 2);
  EXPECT_EQ(beyond.Error()["code"], "SHAPE_MISMATCH");
}

TEST(EngineConfigTest, ParseAndDefaults) {
  const EngineConfig d = ParseEngineConfig("{}");
  EXPECT_FALSE(d.ratio.has_value());
  EXPECT_EQ(d.fpr_level, 0.01);
  EXPECT_EQ(d.rounds, 5u);
  const EngineConfig c = ParseEngineConfig(
      R"({"layers": [2, 6], "rounds": 3, "seed": 9, "threshold": 0.5})");
  EXPECT_EQ(c.layers, (LayerRange{2, 6}));
  EXPECT_EQ(c.rounds, 3u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.threshold, 0.5);
  EXPECT_EQ(CodeOf([] { ParseEngineConfig(R"({"bogus": 1})"); }),
            ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { ParseEngineConfig("[]"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { ParseEngineConfig(R"({"rounds": "x"})"); }),
            ErrorCode::kConfig);
  EXPECT_EQ(ParseLayerRange("3:3"), (LayerRange{3, 3}));
  EXPECT_EQ(CodeOf([] { ParseLayerRange("0:3"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { ParseLayerRange("3"); }), ErrorCode::kConfig);
}

TEST_F(CliTest, UsageErrors) {
  const CliRun none = Cli({});
  EXPECT_EQ(none.code, 1);
  EXPECT_EQ(none.Error()["code"], "USAGE_ERROR");
  const CliRun unknown = Cli({"frobnicate"});
  EXPECT_EQ(unknown.code, 1);
  EXPECT_EQ(unknown.Error()["code"], "USAGE_ERROR");
  const CliRun missing = Cli({"detect", "--model", *model_});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(missing.Error()["code"], "USAGE_ERROR");
  const CliRun help = Cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("detect"), std::string::npos);
}

TEST_F(CliTest, CalibrateWritesCalibration) {
  const std::string out = dir_->File("calib.json");
  const CliRun r = Cli({"calibrate", "--manifest", *manifest_, "--model", *model_,
                        "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Slurp(out), Slurp(CalibrationPathFor(*model_)));
}

TEST_F(CliTest, EvalWithModelReportsMetricsAndOverlap) {
  const CliRun r = Cli({"eval", "--manifest", *manifest_, "--model", *model_,
                        "--out", dir_->File("eval.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = json::parse(r.out);
  EXPECT_GE(m["auroc"].get<double>(), 0.99);
  EXPECT_LT(m["overlap"].get<double>(), 0.2);
  EXPECT_EQ(json::parse(Slurp(dir_->File("eval.json"))), m);
}

TEST_F(CliTest, EvalBootstrap) {
  const CliRun r = Cli({"eval", "--manifest", *manifest_, "--rounds", "2",
                        "--train-pairs", "24", "--test-pairs", "24", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = json::parse(r.out);
  EXPECT_EQ(m["bootstrap"]["rounds"], 2);
  EXPECT_GE(m["auroc"].get<double>(), 0.95);
  const CliRun again = Cli({"eval", "--manifest", *manifest_, "--rounds", "2",
                            "--train-pairs", "24", "--test-pairs", "24", "--seed", "3"});
  EXPECT_EQ(r.out, again.out);
}

TEST_F(CliTest, SynthAndDiagnostics) {
  const std::string out = dir_->File("synth");
  const CliRun s = Cli({"synth", "--out", out, "--pairs", "20", "--dim", "8",
                        "--num-layers", "3", "--tokens", "6", "--mask", "0,1,0",
                        "--direction", "basis", "--shift", "3"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(json::parse(s.out)["entries"], 40);

  const CliRun heat = Cli({"diag", "heatmap", "--manifest", out + "/manifest.json"});
  ASSERT_EQ(heat.code, 0) << heat.err;
  EXPECT_EQ(heat.out.rfind("layer,position,delta_norm\n", 0), 0u);
  EXPECT_EQ(std::count(heat.out.begin(), heat.out.end(), '\n'), 1 + 3 * 6);

  const CliRun overlap = Cli({"diag", "overlap", "--manifest", *manifest_,
                              "--model", *model_, "--bins", "10"});
  ASSERT_EQ(overlap.code, 0) << overlap.err;
  const json o = json::parse(overlap.out);
  EXPECT_EQ(o["bins"], 10);
  EXPECT_EQ(o["lgt_count"], 48);

  const CliRun bad_mask = Cli({"synth", "--out", out, "--mask", "0,x"});
  EXPECT_EQ(bad_mask.code, 1);
  const CliRun bad_dir = Cli({"synth", "--out", out, "--direction", "diagonal"});
  EXPECT_EQ(bad_dir.code, 1);
  EXPECT_EQ(bad_dir.Error()["code"], "USAGE_ERROR");
}

TEST_F(CliTest, ServeRejectsMalformedBind) {
  const CliRun r = Cli({"serve", "--model", *model_, "--bind", "127.0.0.1:notaport"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.Error()["code"], "CONFIG_ERROR");
}

}  // namespace
}  // namespace probedet
