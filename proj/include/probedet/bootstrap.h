#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "probedet/feature_model.h"
#include "probedet/manifest.h"

namespace probedet {

struct BootstrapConfig {
  uint32_t rounds = 5;
  uint32_t train_pairs = 512;
  uint32_t test_pairs = 1000;
  uint64_t seed = 0;
  double fpr_level = 0.01;
  FitConfig fit;
};

struct RoundMetrics {
  double auroc = 0.0;
  double tpr_at_fpr = 0.0;
  double threshold = 0.0;
  double accuracy = 0.0;  // on the test sample at the train-calibrated threshold
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator, 0 for one round
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct BootstrapSummary {
  uint32_t rounds = 0;
  uint64_t seed = 0;
  double fpr_level = 0.0;
  std::vector<RoundMetrics> per_round;
  std::map<std::string, MetricSummary> metrics;  // keyed by metric name
};

// Mean, sample std and normal-approximation 95% CI (mean +- 1.96 std/sqrt(n)).
MetricSummary Summarize(std::span<const double> values);

// Per round r (stream seed DeriveSeed(seed, r)): the distinct pairs are
// shuffled and split into disjoint train/test pools sized in proportion to
// train_pairs:test_pairs; each pool is then sampled with replacement. The
// model and threshold are fitted on the train sample, AUROC and TPR@FPR are
// measured on the test sample. Needs at least two distinct pairs.
BootstrapSummary BootstrapEvaluate(std::span<const TensorPair> pairs,
                                   const BootstrapConfig& config);

BootstrapSummary BootstrapEvaluate(const DatasetManifest& manifest,
                                   const BootstrapConfig& config);

std::string BootstrapToJson(const BootstrapSummary& summary);

}  // namespace probedet
