#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "probedet/tensor_store.h"

namespace probedet {

// LGT is the positive class and a higher score means more LGT-like. All
// functions below take parallel score/label sequences and require at least
// one HWT and one LGT label (UNKNOWN is rejected).

// LGT iff score > threshold.
Label Classify(double score, double threshold);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

// Thresholds at +inf, every midpoint between adjacent distinct scores, and
// -inf; returns deduplicated points ordered by (fpr, tpr).
std::vector<RocPoint> ComputeRoc(std::span<const double> scores,
                                 std::span<const Label> labels);

// P(score_LGT > score_HWT) + 0.5 P(tie), computed from exact pair counts.
double Auroc(std::span<const double> scores, std::span<const Label> labels);

// Largest TPR among the ROC thresholds whose FPR is <= fpr_level.
double TprAtFpr(std::span<const double> scores, std::span<const Label> labels,
                double fpr_level);

struct ThresholdFit {
  double threshold = 0.0;
  double objective = 0.0;  // TPR + 1 - FPR, in [0, 2]
};

// Maximises TPR + (1 - FPR) over: a sentinel below the minimum score, every
// midpoint between adjacent distinct scores, and a sentinel above the maximum.
// Ties go to the smallest threshold.
ThresholdFit FitThreshold(std::span<const double> scores,
                          std::span<const Label> labels);

// Candidate thresholds FitThreshold scans, ascending. Exposed for diagnostics.
std::vector<double> ThresholdCandidates(std::span<const double> scores);

struct ClassStats {
  size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator; 0 for a single score
  double min = 0.0;
  double max = 0.0;
};

ClassStats ComputeClassStats(std::span<const double> scores);

inline constexpr double kDefaultFprLevel = 0.01;

struct CalibrationResult {
  double threshold = 0.0;
  double objective = 0.0;
  std::vector<RocPoint> roc;
  double auroc = 0.0;
  std::map<double, double> tpr_at_fpr;
  ClassStats hwt;
  ClassStats lgt;
};

CalibrationResult Calibrate(std::span<const double> scores,
                            std::span<const Label> labels,
                            std::span<const double> fpr_levels);

std::string CalibrationToJson(const CalibrationResult& result);
CalibrationResult CalibrationFromJson(const std::string& text);

}  // namespace probedet
