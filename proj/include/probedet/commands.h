#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "probedet/errors.h"
#include "probedet/metrics.h"
#include "probedet/probing_model.h"
#include "probedet/scoring.h"

namespace probedet {

// Exit codes of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitShape = 2;

int ExitCodeFor(ErrorCode code);

// {"error": {"code": "...", "message": "..."}}
std::string ErrorJson(std::string_view code, std::string_view message);

// Calibration written next to a model file by `fit` and `calibrate`.
std::string CalibrationPathFor(const std::string& model_path);

// The model plus whatever threshold applies to it.
struct LoadedDetector {
  ProbingModel model;
  std::string model_version;
  std::optional<double> threshold;
};

// Loads the model and, if present, its calibration; `threshold_override`
// replaces the calibrated threshold.
LoadedDetector LoadDetector(const std::string& model_path,
                            std::optional<double> threshold_override);

// The single scoring path shared by `detect` and the HTTP service.
DetectionReport Detect(const ActivationTensor& tensor,
                       const LoadedDetector& detector,
                       std::optional<double> ratio = std::nullopt);

// Runs the CLI. `args` excludes the program name. Subcommands:
// fit, calibrate, detect, eval, synth, diag, serve.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace probedet
