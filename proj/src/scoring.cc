#include "probedet/scoring.h"

#include "json.hpp"
#include "probedet/errors.h"
#include "probedet/feature_model.h"
#include "probedet/metrics.h"

namespace probedet {
namespace {

double Dot(std::span<const float> h, const std::vector<double>& p) {
  double sum = 0.0;
  for (size_t k = 0; k < h.size(); ++k) {
    sum += static_cast<double>(h[k]) * p[k];
  }
  return sum;
}

void CheckCompatible(const ActivationTensor& tensor,
                     const ProbingModel& model) {
  if (tensor.dim() != model.dim) {
    Fail(ErrorCode::kShape, "sample '" + tensor.sample_id() + "' has dim " +
                                std::to_string(tensor.dim()) +
                                ", model expects " + std::to_string(model.dim));
  }
  if (model.layer_range.hi > tensor.layers()) {
    Fail(ErrorCode::kShape,
         "sample '" + tensor.sample_id() + "' has " +
             std::to_string(tensor.layers()) + " layers, model needs " +
             std::to_string(model.layer_range.hi));
  }
}

// Fills token scores and per-layer projection sums over the window.
void ScoreWindow(const ActivationTensor& window, const ProbingModel& model,
                 std::vector<double>& token_scores,
                 std::vector<double>* layer_sums) {
  const uint32_t layers = model.layer_count();
  const double inv_layers = 1.0 / layers;
  token_scores.assign(window.tokens(), 0.0);
  if (layer_sums) layer_sums->assign(layers, 0.0);
  for (uint32_t t = 0; t < window.tokens(); ++t) {
    double sum = 0.0;
    for (uint32_t i = 0; i < layers; ++i) {
      const double proj =
          Dot(window.At(model.layer_range.lo - 1 + i, t), model.vectors[i]);
      sum += proj;
      if (layer_sums) (*layer_sums)[i] += proj;
    }
    token_scores[t] = sum * inv_layers;
  }
}

double Mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

double TokenRepreScore(std::span<const std::span<const float>> per_layer,
                       const ProbingModel& model) {
  if (per_layer.size() != model.layer_count()) {
    Fail(ErrorCode::kShape, "token activations cover " +
                                std::to_string(per_layer.size()) +
                                " layers, model has " +
                                std::to_string(model.layer_count()));
  }
  double sum = 0.0;
  for (size_t i = 0; i < per_layer.size(); ++i) {
    if (per_layer[i].size() != model.dim) {
      Fail(ErrorCode::kShape, "token activation dim mismatch");
    }
    sum += Dot(per_layer[i], model.vectors[i]);
  }
  return sum * (1.0 / static_cast<double>(per_layer.size()));
}

DetectionReport TextRepreScore(const ActivationTensor& tensor,
                               const ProbingModel& model,
                               std::optional<double> ratio) {
  CheckCompatible(tensor, model);
  const ActivationTensor window = SelectActivationWindow(
      tensor, ratio.value_or(model.fit_stats.activation_ratio));
  std::vector<double> token_scores;
  std::vector<double> layer_sums;
  ScoreWindow(window, model, token_scores, &layer_sums);

  DetectionReport report;
  report.sample_id = tensor.sample_id();
  report.represcore = Mean(token_scores);
  std::map<uint32_t, double> contributions;
  for (uint32_t i = 0; i < layer_sums.size(); ++i) {
    contributions[model.layer_range.lo + i] =
        layer_sums[i] / static_cast<double>(window.tokens());
  }
  report.token_scores = std::move(token_scores);
  report.layer_contributions = std::move(contributions);
  return report;
}

double TextScore(const ActivationTensor& tensor, const ProbingModel& model,
                 std::optional<double> ratio) {
  CheckCompatible(tensor, model);
  const ActivationTensor window = SelectActivationWindow(
      tensor, ratio.value_or(model.fit_stats.activation_ratio));
  std::vector<double> token_scores;
  ScoreWindow(window, model, token_scores, nullptr);
  return Mean(token_scores);
}

void ApplyThreshold(DetectionReport& report, double threshold) {
  report.threshold_used = threshold;
  report.verdict = Classify(report.represcore, threshold);
}

std::string ReportToJson(const DetectionReport& report) {
  using nlohmann::json;
  json doc;
  doc["sample_id"] = report.sample_id;
  doc["represcore"] = report.represcore;
  doc["verdict"] =
      report.verdict ? json(std::string(LabelName(*report.verdict))) : json();
  doc["threshold"] = report.threshold_used ? json(*report.threshold_used) : json();
  doc["token_scores"] = report.token_scores ? json(*report.token_scores) : json();
  if (report.layer_contributions) {
    json layers = json::object();
    for (const auto& [layer, value] : *report.layer_contributions) {
      layers[std::to_string(layer)] = value;
    }
    doc["layer_contributions"] = std::move(layers);
  } else {
    doc["layer_contributions"] = json();
  }
  return doc.dump();
}

}  // namespace probedet
