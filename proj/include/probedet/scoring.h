#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "probedet/probing_model.h"
#include "probedet/tensor_store.h"

namespace probedet {

struct DetectionReport {
  std::string sample_id;
  double represcore = 0.0;
  // Absent until a threshold is applied (uncalibrated report).
  std::optional<Label> verdict;
  std::optional<double> threshold_used;
  std::optional<std::vector<double>> token_scores;
  // Keyed by 1-based layer index.
  std::optional<std::map<uint32_t, double>> layer_contributions;
};

// Mean over the model's layers of h_l . P_l. `per_layer` holds one hidden
// vector per layer of model.layer_range, in order.
double TokenRepreScore(std::span<const std::span<const float>> per_layer,
                       const ProbingModel& model);

// Windows the tensor, scores every kept token and averages. The window ratio
// defaults to the one the model was fitted with.
DetectionReport TextRepreScore(const ActivationTensor& tensor,
                               const ProbingModel& model,
                               std::optional<double> ratio = std::nullopt);

// Score only, without keeping per-token detail.
double TextScore(const ActivationTensor& tensor, const ProbingModel& model,
                 std::optional<double> ratio = std::nullopt);

// Attaches a verdict: LGT iff represcore > threshold.
void ApplyThreshold(DetectionReport& report, double threshold);

std::string ReportToJson(const DetectionReport& report);

}  // namespace probedet
