#include "probedet/bootstrap.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "probedet/errors.h"
#include "probedet/metrics.h"
#include "probedet/rng.h"
#include "probedet/scoring.h"

namespace probedet {

MetricSummary Summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / (n - 1.0));
  }
  const double half = 1.96 * s.std / std::sqrt(n);
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

namespace {

void ScoreSample(std::span<const TensorPair> sample, const ProbingModel& model,
                 std::vector<double>& scores, std::vector<Label>& labels) {
  scores.clear();
  labels.clear();
  for (const auto& p : sample) {
    scores.push_back(TextScore(*p.lgt, model));
    labels.push_back(Label::kLgt);
    scores.push_back(TextScore(*p.hwt, model));
    labels.push_back(Label::kHwt);
  }
}

RoundMetrics RunRound(std::span<const TensorPair> pairs,
                      const BootstrapConfig& config, uint32_t round) {
  Rng rng(DeriveSeed(config.seed, round));
  std::vector<size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.Index(i)]);
  }
  const double share = static_cast<double>(config.train_pairs) /
                       (config.train_pairs + config.test_pairs);
  const size_t train_pool = std::clamp<size_t>(
      static_cast<size_t>(std::llround(share * pairs.size())), 1,
      pairs.size() - 1);
  const size_t test_pool = pairs.size() - train_pool;

  std::vector<TensorPair> train(config.train_pairs);
  for (auto& p : train) p = pairs[order[rng.Index(train_pool)]];
  std::vector<TensorPair> test(config.test_pairs);
  for (auto& p : test) p = pairs[order[train_pool + rng.Index(test_pool)]];

  const ProbingModel model = FitProbingModel(train, config.fit);
  std::vector<double> scores;
  std::vector<Label> labels;
  ScoreSample(train, model, scores, labels);
  const ThresholdFit fit = FitThreshold(scores, labels);

  ScoreSample(test, model, scores, labels);
  RoundMetrics m;
  m.threshold = fit.threshold;
  m.auroc = Auroc(scores, labels);
  m.tpr_at_fpr = TprAtFpr(scores, labels, config.fpr_level);
  size_t correct = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (Classify(scores[i], fit.threshold) == labels[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
  return m;
}

}  // namespace

BootstrapSummary BootstrapEvaluate(std::span<const TensorPair> pairs,
                                   const BootstrapConfig& config) {
  if (config.rounds < 1) {
    Fail(ErrorCode::kArgument, "bootstrap needs at least one round");
  }
  if (config.train_pairs < 1 || config.test_pairs < 1) {
    Fail(ErrorCode::kArgument, "train_pairs and test_pairs must be >= 1");
  }
  if (pairs.size() < 2) {
    Fail(ErrorCode::kArgument,
         "bootstrap needs at least two distinct pairs for disjoint "
         "train/test pools, got " + std::to_string(pairs.size()));
  }
  BootstrapSummary summary;
  summary.rounds = config.rounds;
  summary.seed = config.seed;
  summary.fpr_level = config.fpr_level;
  for (uint32_t r = 0; r < config.rounds; ++r) {
    summary.per_round.push_back(RunRound(pairs, config, r));
  }
  auto column = [&](double RoundMetrics::*field) {
    std::vector<double> values;
    for (const auto& m : summary.per_round) values.push_back(m.*field);
    return Summarize(values);
  };
  summary.metrics["auroc"] = column(&RoundMetrics::auroc);
  summary.metrics["tpr_at_fpr"] = column(&RoundMetrics::tpr_at_fpr);
  summary.metrics["threshold"] = column(&RoundMetrics::threshold);
  summary.metrics["accuracy"] = column(&RoundMetrics::accuracy);
  return summary;
}

BootstrapSummary BootstrapEvaluate(const DatasetManifest& manifest,
                                   const BootstrapConfig& config) {
  const LoadedPairs loaded = LoadPairs(manifest);
  return BootstrapEvaluate(loaded.pairs, config);
}

std::string BootstrapToJson(const BootstrapSummary& s) {
  using nlohmann::json;
  json rounds = json::array();
  for (const auto& m : s.per_round) {
    rounds.push_back({{"auroc", m.auroc},
                      {"tpr_at_fpr", m.tpr_at_fpr},
                      {"threshold", m.threshold},
                      {"accuracy", m.accuracy}});
  }
  json metrics = json::object();
  for (const auto& [name, m] : s.metrics) {
    metrics[name] = {{"mean", m.mean},
                     {"std", m.std},
                     {"ci95", {m.ci_low, m.ci_high}}};
  }
  const json doc = {{"rounds", s.rounds},
                    {"seed", s.seed},
                    {"fpr_level", s.fpr_level},
                    {"resampling", "train_and_test_with_replacement"},
                    {"per_round", std::move(rounds)},
                    {"summary", std::move(metrics)}};
  return doc.dump();
}

}  // namespace probedet
