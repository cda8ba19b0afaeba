#include "probedet/commands.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "byte_io.h"
#include "json.hpp"
#include "probedet/bootstrap.h"
#include "probedet/diagnostics.h"
#include "probedet/engine_config.h"
#include "probedet/feature_model.h"
#include "probedet/manifest.h"
#include "probedet/model_io.h"
#include "probedet/service.h"
#include "probedet/synth.h"

namespace probedet {

using nlohmann::json;
namespace fs = std::filesystem;

int ExitCodeFor(ErrorCode code) {
  return code == ErrorCode::kShape ? kExitShape : kExitInput;
}

std::string ErrorJson(std::string_view code, std::string_view message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

std::string CalibrationPathFor(const std::string& model_path) {
  return model_path + ".calibration.json";
}

LoadedDetector LoadDetector(const std::string& model_path,
                            std::optional<double> threshold_override) {
  LoadedDetector d;
  const auto bytes = internal::ReadFileBytes(model_path);
  d.model = DeserializeModel(bytes);
  d.model_version = ModelVersion(bytes);
  if (threshold_override) {
    d.threshold = threshold_override;
  } else if (const std::string calib = CalibrationPathFor(model_path);
             fs::exists(calib)) {
    std::ifstream in(calib);
    std::stringstream ss;
    ss << in.rdbuf();
    d.threshold = CalibrationFromJson(ss.str()).threshold;
  }
  return d;
}

DetectionReport Detect(const ActivationTensor& tensor,
                       const LoadedDetector& detector,
                       std::optional<double> ratio) {
  DetectionReport report = TextRepreScore(tensor, detector.model, ratio);
  if (detector.threshold) ApplyThreshold(report, *detector.threshold);
  return report;
}

namespace {

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

struct ScoredSet {
  std::vector<double> scores;
  std::vector<Label> labels;
  std::vector<double> hwt;
  std::vector<double> lgt;
};

ScoredSet ScoreManifest(const DatasetManifest& manifest,
                        const ProbingModel& model,
                        std::optional<double> ratio) {
  ScoredSet s;
  for (const auto& e : manifest.entries) {
    if (e.label == Label::kUnknown) continue;
    const double score =
        TextScore(ReadActivationFile(manifest.ResolvePath(e)), model, ratio);
    s.scores.push_back(score);
    s.labels.push_back(e.label);
    (e.label == Label::kLgt ? s.lgt : s.hwt).push_back(score);
  }
  if (s.scores.empty()) {
    Fail(ErrorCode::kEmptyDataset, "manifest has no labelled entries");
  }
  return s;
}

json MetricsJson(const CalibrationResult& c) {
  const json calib = json::parse(CalibrationToJson(c));
  return {{"auroc", c.auroc},
          {"tpr_at_fpr", calib.at("tpr_at_fpr")},
          {"threshold", c.threshold},
          {"objective", c.objective},
          {"roc", calib.at("roc")},
          {"class_stats", calib.at("class_stats")},
          {"bootstrap", nullptr}};
}

// Registers the shared configuration flags and folds them over an optional
// --config file.
class ConfigFlags {
 public:
  void AddRatio(CLI::App* app) {
    ratio_ = app->add_option("--ratio", ratio_value_, "activation token ratio in (0,1]");
  }
  void AddLayers(CLI::App* app) {
    layers_ = app->add_option("--layers", layers_value_, "layer range LO:HI (1-based)");
  }
  void AddFprLevel(CLI::App* app) {
    fpr_ = app->add_option("--fpr-level", fpr_value_, "FPR budget for TPR@FPR");
  }
  void AddThreshold(CLI::App* app) {
    threshold_ = app->add_option("--threshold", threshold_value_,
                                 "override the calibrated threshold");
  }
  void AddBootstrap(CLI::App* app) {
    rounds_ = app->add_option("--rounds", rounds_value_, "bootstrap rounds");
    seed_ = app->add_option("--seed", seed_value_, "bootstrap seed");
    train_ = app->add_option("--train-pairs", train_value_, "train pairs per round");
    test_ = app->add_option("--test-pairs", test_value_, "test pairs per round");
  }
  void AddBins(CLI::App* app) {
    bins_ = app->add_option("--bins", bins_value_, "histogram bins for overlap");
  }
  void AddOut(CLI::App* app, const std::string& help) {
    out_ = app->add_option("--out", out_value_, help);
  }
  void AddMetricsOut(CLI::App* app) {
    metrics_ = app->add_option("--metrics-out", metrics_value_, "metrics JSON path");
  }
  void AddConfig(CLI::App* app) {
    app->add_option("--config", config_path_, "JSON config file (flags override)");
  }

  EngineConfig Resolve() const {
    EngineConfig c = config_path_.empty() ? EngineConfig{}
                                          : LoadEngineConfig(config_path_);
    if (Given(ratio_)) c.ratio = ratio_value_;
    if (Given(layers_)) c.layers = ParseLayerRange(layers_value_);
    if (Given(fpr_)) c.fpr_level = fpr_value_;
    if (Given(threshold_)) c.threshold = threshold_value_;
    if (Given(rounds_)) c.rounds = rounds_value_;
    if (Given(seed_)) c.seed = seed_value_;
    if (Given(train_)) c.train_pairs = train_value_;
    if (Given(test_)) c.test_pairs = test_value_;
    if (Given(bins_)) c.bins = bins_value_;
    if (Given(out_)) c.out = out_value_;
    if (Given(metrics_)) c.metrics_out = metrics_value_;
    ValidateEngineConfig(c);
    return c;
  }

 private:
  static bool Given(const CLI::Option* opt) { return opt && opt->count() > 0; }

  std::string config_path_;
  CLI::Option* ratio_ = nullptr;
  CLI::Option* layers_ = nullptr;
  CLI::Option* fpr_ = nullptr;
  CLI::Option* threshold_ = nullptr;
  CLI::Option* rounds_ = nullptr;
  CLI::Option* seed_ = nullptr;
  CLI::Option* train_ = nullptr;
  CLI::Option* test_ = nullptr;
  CLI::Option* bins_ = nullptr;
  CLI::Option* out_ = nullptr;
  CLI::Option* metrics_ = nullptr;
  double ratio_value_ = 0.0;
  std::string layers_value_;
  double fpr_value_ = 0.0;
  double threshold_value_ = 0.0;
  uint32_t rounds_value_ = 0;
  uint64_t seed_value_ = 0;
  uint32_t train_value_ = 0;
  uint32_t test_value_ = 0;
  int bins_value_ = 0;
  std::string out_value_;
  std::string metrics_value_;
};

int CmdFit(const std::string& manifest_path, const EngineConfig& cfg,
           std::ostream& out) {
  if (cfg.out.empty()) Fail(ErrorCode::kConfig, "fit requires --out MODEL_PATH");
  const DatasetManifest manifest = LoadManifest(manifest_path);
  const LoadedPairs loaded = LoadPairs(manifest);
  FitConfig fit;
  fit.ratio = cfg.ratio.value_or(manifest.activation_ratio);
  fit.layers = cfg.layers.value_or(manifest.layer_range);
  const ProbingModel fitted = FitProbingModel(loaded.pairs, fit);

  const auto bytes = SerializeModel(fitted);
  {
    std::ofstream f(cfg.out, std::ios::binary | std::ios::trunc);
    if (!f) Fail(ErrorCode::kIo, "cannot write model '" + cfg.out + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) Fail(ErrorCode::kIo, "write failed for '" + cfg.out + "'");
  }
  // Calibrate with the model exactly as detection will load it.
  const ProbingModel model = DeserializeModel(bytes);
  std::vector<double> scores;
  std::vector<Label> labels;
  for (const auto& p : loaded.pairs) {
    scores.push_back(TextScore(*p.lgt, model));
    labels.push_back(Label::kLgt);
    scores.push_back(TextScore(*p.hwt, model));
    labels.push_back(Label::kHwt);
  }
  const double levels[] = {cfg.fpr_level};
  const CalibrationResult calib = Calibrate(scores, labels, levels);
  const std::string calib_path = CalibrationPathFor(cfg.out);
  WriteText(calib_path, CalibrationToJson(calib));
  if (!cfg.metrics_out.empty()) {
    WriteText(cfg.metrics_out, MetricsJson(calib).dump(2) + "\n");
  }

  const json tpr = json::parse(CalibrationToJson(calib)).at("tpr_at_fpr");
  const json summary = {
      {"model", cfg.out},
      {"calibration", calib_path},
      {"model_version", ModelVersion(bytes)},
      {"pair_count", model.fit_stats.pair_count},
      {"layer_range", {model.layer_range.lo, model.layer_range.hi}},
      {"dim", model.dim},
      {"activation_ratio", model.fit_stats.activation_ratio},
      {"mean_score_hwt", model.fit_stats.mean_score_hwt},
      {"mean_score_lgt", model.fit_stats.mean_score_lgt},
      {"degenerate", model.fit_stats.degenerate},
      {"explained_variance", model.explained_variance},
      {"train_auroc", calib.auroc},
      {"threshold", calib.threshold},
      {"objective", calib.objective},
      {"tpr_at_fpr", tpr}};
  out << summary.dump() << '\n';
  return kExitOk;
}

int CmdCalibrate(const std::string& manifest_path, const std::string& model_path,
                 const EngineConfig& cfg, std::ostream& out) {
  const DatasetManifest manifest = LoadManifest(manifest_path);
  const ProbingModel model = LoadModel(model_path);
  const ScoredSet s = ScoreManifest(manifest, model, cfg.ratio);
  const double levels[] = {cfg.fpr_level};
  const CalibrationResult calib = Calibrate(s.scores, s.labels, levels);
  const std::string path =
      cfg.out.empty() ? CalibrationPathFor(model_path) : cfg.out;
  const std::string text = CalibrationToJson(calib);
  WriteText(path, text);
  out << json::parse(text).dump() << '\n';
  return kExitOk;
}

std::vector<std::string> DetectInputs(const std::string& input) {
  if (!fs::exists(input)) Fail(ErrorCode::kIo, "input '" + input + "' not found");
  if (!fs::is_directory(input)) return {input};
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (entry.is_regular_file() && entry.path().extension() == ".rgaf") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end(), [](const std::string& a, const std::string& b) {
    return fs::path(a).filename().string() < fs::path(b).filename().string();
  });
  return files;
}

int CmdDetect(const std::string& model_path, const std::string& input,
              const EngineConfig& cfg, std::ostream& out) {
  const LoadedDetector detector = LoadDetector(model_path, cfg.threshold);
  for (const auto& file : DetectInputs(input)) {
    const ActivationTensor tensor = ReadActivationFile(file);
    out << ReportToJson(Detect(tensor, detector, cfg.ratio)) << '\n';
  }
  return kExitOk;
}

int CmdEval(const std::string& manifest_path, const std::string& model_path,
            const EngineConfig& cfg, std::ostream& out) {
  const DatasetManifest manifest = LoadManifest(manifest_path);
  json metrics;
  if (!model_path.empty()) {
    const ProbingModel model = LoadModel(model_path);
    const ScoredSet s = ScoreManifest(manifest, model, cfg.ratio);
    const double levels[] = {cfg.fpr_level};
    metrics = MetricsJson(Calibrate(s.scores, s.labels, levels));
    metrics["overlap"] = DistributionOverlap(s.lgt, s.hwt, cfg.bins);
  } else {
    BootstrapConfig bc;
    bc.rounds = cfg.rounds;
    bc.seed = cfg.seed;
    bc.train_pairs = cfg.train_pairs;
    bc.test_pairs = cfg.test_pairs;
    bc.fpr_level = cfg.fpr_level;
    bc.fit.ratio = cfg.ratio.value_or(manifest.activation_ratio);
    bc.fit.layers = cfg.layers.value_or(manifest.layer_range);
    const BootstrapSummary summary = BootstrapEvaluate(manifest, bc);
    metrics = {{"auroc", summary.metrics.at("auroc").mean},
               {"tpr_at_fpr",
                {{json(cfg.fpr_level).dump(), summary.metrics.at("tpr_at_fpr").mean}}},
               {"threshold", summary.metrics.at("threshold").mean},
               {"objective", nullptr},
               {"roc", nullptr},
               {"bootstrap", json::parse(BootstrapToJson(summary))}};
  }
  const std::string dest = !cfg.metrics_out.empty() ? cfg.metrics_out : cfg.out;
  if (!dest.empty()) WriteText(dest, metrics.dump(2) + "\n");
  out << metrics.dump() << '\n';
  return kExitOk;
}

struct SynthFlags {
  uint64_t seed = 0;
  uint32_t pairs = 64;
  uint32_t dim = 64;
  uint32_t layers = 8;
  uint32_t tokens = 32;
  double shift = 1.0;
  double noise = 1.0;
  std::string direction = "random";
  std::string mask;
  double ratio = kDefaultActivationRatio;
  std::string out;
};

int CmdSynth(const SynthFlags& f, std::ostream& out) {
  SynthSpec spec;
  spec.seed = f.seed;
  spec.pair_count = f.pairs;
  spec.dim = f.dim;
  spec.layers = f.layers;
  spec.tokens = f.tokens;
  spec.shift = f.shift;
  spec.noise_std = f.noise;
  spec.activation_ratio = f.ratio;
  spec.direction_mode =
      f.direction == "basis" ? DirectionMode::kBasis : DirectionMode::kRandomUnit;
  if (!f.mask.empty()) {
    std::vector<bool> mask;
    for (char c : f.mask) {
      if (c == '1') mask.push_back(true);
      else if (c == '0') mask.push_back(false);
      else if (c != ',') Fail(ErrorCode::kConfig, "--mask takes 0/1 flags, e.g. 0,0,1");
    }
    spec.layer_mask = std::move(mask);
  }
  const DatasetManifest manifest = GenerateSynthetic(spec, f.out);
  out << json{{"manifest", (fs::path(f.out) / "manifest.json").string()},
              {"pairs", spec.pair_count},
              {"entries", manifest.entries.size()}}
             .dump()
      << '\n';
  return kExitOk;
}

int CmdHeatmap(const std::string& manifest_path, const EngineConfig& cfg,
               std::ostream& out) {
  const DatasetManifest manifest = LoadManifest(manifest_path);
  const Heatmap heatmap =
      ActivationHeatmap(manifest, cfg.layers.value_or(manifest.layer_range));
  const std::string csv = HeatmapToCsv(heatmap);
  if (cfg.out.empty()) {
    out << csv;
  } else {
    WriteText(cfg.out, csv);
  }
  return kExitOk;
}

int CmdOverlap(const std::string& manifest_path, const std::string& model_path,
               const EngineConfig& cfg, std::ostream& out) {
  const DatasetManifest manifest = LoadManifest(manifest_path);
  const ProbingModel model = LoadModel(model_path);
  const ScoredSet s = ScoreManifest(manifest, model, cfg.ratio);
  if (s.lgt.empty() || s.hwt.empty()) {
    Fail(ErrorCode::kArgument, "overlap needs scores of both classes");
  }
  const json doc = {{"overlap", DistributionOverlap(s.lgt, s.hwt, cfg.bins)},
                    {"bins", cfg.bins},
                    {"hwt_count", s.hwt.size()},
                    {"lgt_count", s.lgt.size()}};
  if (!cfg.out.empty()) WriteText(cfg.out, doc.dump(2) + "\n");
  out << doc.dump() << '\n';
  return kExitOk;
}

int CmdServe(const std::string& model_path, const std::string& bind,
             const EngineConfig& cfg, std::ostream& out) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    Fail(ErrorCode::kConfig, "--bind expects HOST:PORT");
  }
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    Fail(ErrorCode::kConfig, "--bind expects HOST:PORT");
  }
  ScoringService service(LoadDetector(model_path, cfg.threshold));
  if (!service.Bind(host, port)) Fail(ErrorCode::kIo, "cannot bind " + bind);
  out << json{{"status", "listening"}, {"bind", bind}}.dump() << std::endl;
  if (!service.ListenAfterBind()) Fail(ErrorCode::kIo, "server stopped on " + bind);
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Probing-vector detector for machine-generated text", "probedet"};
  app.require_subcommand(1);

  std::string manifest;
  std::string model;
  std::string input;
  std::string bind = "127.0.0.1:8080";

  ConfigFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "fit probing vectors and a threshold");
  fit->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  fit_flags.AddConfig(fit);
  fit_flags.AddRatio(fit);
  fit_flags.AddLayers(fit);
  fit_flags.AddFprLevel(fit);
  fit_flags.AddOut(fit, "model output path");
  fit_flags.AddMetricsOut(fit);

  ConfigFlags calib_flags;
  auto* calibrate = app.add_subcommand("calibrate", "refit the threshold for a model");
  calibrate->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  calibrate->add_option("--model", model, "model file")->required();
  calib_flags.AddConfig(calibrate);
  calib_flags.AddRatio(calibrate);
  calib_flags.AddFprLevel(calibrate);
  calib_flags.AddOut(calibrate, "calibration output path");

  ConfigFlags detect_flags;
  auto* detect = app.add_subcommand("detect", "score activation files");
  detect->add_option("--model", model, "model file")->required();
  detect->add_option("--input", input, "RGAF file or directory")->required();
  detect_flags.AddConfig(detect);
  detect_flags.AddRatio(detect);
  detect_flags.AddThreshold(detect);

  ConfigFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "evaluate a model or run the bootstrap protocol");
  eval->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  eval->add_option("--model", model, "evaluate this model instead of bootstrapping");
  eval_flags.AddConfig(eval);
  eval_flags.AddRatio(eval);
  eval_flags.AddLayers(eval);
  eval_flags.AddFprLevel(eval);
  eval_flags.AddBootstrap(eval);
  eval_flags.AddBins(eval);
  eval_flags.AddOut(eval, "metrics output path");
  eval_flags.AddMetricsOut(eval);

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "generate a synthetic paired dataset");
  synth->add_option("--out", synth_flags.out, "output directory")->required();
  synth->add_option("--seed", synth_flags.seed, "generator seed");
  synth->add_option("--pairs", synth_flags.pairs, "pair count N");
  synth->add_option("--dim", synth_flags.dim, "hidden dim d");
  synth->add_option("--num-layers", synth_flags.layers, "layer count L");
  synth->add_option("--tokens", synth_flags.tokens, "tokens per sample n");
  synth->add_option("--shift", synth_flags.shift, "planted shift");
  synth->add_option("--noise", synth_flags.noise, "HWT noise std");
  synth->add_option("--direction", synth_flags.direction, "random or basis")
      ->check(CLI::IsMember({"random", "basis"}));
  synth->add_option("--mask", synth_flags.mask, "per-layer shift mask, e.g. 0,0,1");
  synth->add_option("--ratio", synth_flags.ratio, "activation ratio for the manifest");

  auto* diag = app.add_subcommand("diag", "diagnostics");
  diag->require_subcommand(1);
  ConfigFlags heat_flags;
  auto* heatmap = diag->add_subcommand("heatmap", "layer x position norm-difference CSV");
  heatmap->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  heat_flags.AddConfig(heatmap);
  heat_flags.AddLayers(heatmap);
  heat_flags.AddOut(heatmap, "CSV output path (default stdout)");
  ConfigFlags overlap_flags;
  auto* overlap = diag->add_subcommand("overlap", "score-distribution overlap");
  overlap->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  overlap->add_option("--model", model, "model file")->required();
  overlap_flags.AddConfig(overlap);
  overlap_flags.AddRatio(overlap);
  overlap_flags.AddBins(overlap);
  overlap_flags.AddOut(overlap, "JSON output path");

  ConfigFlags serve_flags;
  auto* serve = app.add_subcommand("serve", "HTTP scoring service");
  serve->add_option("--model", model, "model file")->required();
  serve->add_option("--bind", bind, "HOST:PORT");
  serve_flags.AddConfig(serve);
  serve_flags.AddThreshold(serve);

  std::vector<std::string> argv_storage{"probedet"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << ErrorJson("USAGE_ERROR", e.what()) << '\n';
    return kExitInput;
  }

  try {
    if (fit->parsed()) return CmdFit(manifest, fit_flags.Resolve(), out);
    if (calibrate->parsed()) {
      return CmdCalibrate(manifest, model, calib_flags.Resolve(), out);
    }
    if (detect->parsed()) return CmdDetect(model, input, detect_flags.Resolve(), out);
    if (eval->parsed()) return CmdEval(manifest, model, eval_flags.Resolve(), out);
    if (synth->parsed()) return CmdSynth(synth_flags, out);
    if (heatmap->parsed()) return CmdHeatmap(manifest, heat_flags.Resolve(), out);
    if (overlap->parsed()) {
      return CmdOverlap(manifest, model, overlap_flags.Resolve(), out);
    }
    if (serve->parsed()) return CmdServe(model, bind, serve_flags.Resolve(), out);
  } catch (const Error& e) {
    err << ErrorJson(ErrorCodeName(e.code()), e.what()) << '\n';
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << ErrorJson("INTERNAL_ERROR", e.what()) << '\n';
    return kExitInput;
  }
  err << ErrorJson("USAGE_ERROR", "no subcommand") << '\n';
  return kExitInput;
}

}  // namespace probedet
