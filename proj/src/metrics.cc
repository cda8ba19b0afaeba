#include "probedet/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "probedet/errors.h"

namespace probedet {
namespace {

// Distinct scores ascending with per-value class counts.
struct ScoreTable {
  std::vector<double> values;
  std::vector<uint64_t> pos;
  std::vector<uint64_t> neg;
  uint64_t total_pos = 0;
  uint64_t total_neg = 0;
};

ScoreTable Tabulate(std::span<const double> scores,
                    std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    Fail(ErrorCode::kArgument, "scores and labels differ in length");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  for (double s : scores) {
    if (std::isnan(s)) Fail(ErrorCode::kArgument, "score is NaN");
  }
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  ScoreTable t;
  for (size_t idx : order) {
    if (t.values.empty() || scores[idx] != t.values.back()) {
      t.values.push_back(scores[idx]);
      t.pos.push_back(0);
      t.neg.push_back(0);
    }
    switch (labels[idx]) {
      case Label::kLgt:
        ++t.pos.back();
        ++t.total_pos;
        break;
      case Label::kHwt:
        ++t.neg.back();
        ++t.total_neg;
        break;
      case Label::kUnknown:
        Fail(ErrorCode::kArgument, "UNKNOWN label in evaluation data");
    }
  }
  if (t.total_pos == 0 || t.total_neg == 0) {
    Fail(ErrorCode::kArgument, "need at least one HWT and one LGT score");
  }
  return t;
}

double Midpoint(double a, double b) {
  const double mid = std::midpoint(a, b);
  return mid < b ? mid : a;
}

}  // namespace

Label Classify(double score, double threshold) {
  return score > threshold ? Label::kLgt : Label::kHwt;
}

std::vector<RocPoint> ComputeRoc(std::span<const double> scores,
                                 std::span<const Label> labels) {
  const ScoreTable t = Tabulate(scores, labels);
  const double p = static_cast<double>(t.total_pos);
  const double n = static_cast<double>(t.total_neg);
  std::vector<RocPoint> roc{{0.0, 0.0}};
  uint64_t tp = 0;
  uint64_t fp = 0;
  // Lowering the threshold past each distinct value admits its samples.
  for (size_t i = t.values.size(); i-- > 0;) {
    tp += t.pos[i];
    fp += t.neg[i];
    const RocPoint point{static_cast<double>(fp) / n,
                         static_cast<double>(tp) / p};
    if (!(point == roc.back())) roc.push_back(point);
  }
  return roc;
}

double Auroc(std::span<const double> scores, std::span<const Label> labels) {
  const ScoreTable t = Tabulate(scores, labels);
  // Twice the Mann-Whitney count: 2 per win, 1 per tie.
  unsigned __int128 doubled = 0;
  uint64_t neg_below = 0;
  for (size_t i = 0; i < t.values.size(); ++i) {
    doubled += static_cast<unsigned __int128>(t.pos[i]) * (2 * neg_below + t.neg[i]);
    neg_below += t.neg[i];
  }
  const long double denom = 2.0L * static_cast<long double>(t.total_pos) *
                            static_cast<long double>(t.total_neg);
  return static_cast<double>(static_cast<long double>(doubled) / denom);
}

double TprAtFpr(std::span<const double> scores, std::span<const Label> labels,
                double fpr_level) {
  if (!(fpr_level >= 0.0 && fpr_level <= 1.0)) {
    Fail(ErrorCode::kArgument, "fpr_level must lie in [0, 1]");
  }
  double best = 0.0;
  for (const RocPoint& point : ComputeRoc(scores, labels)) {
    if (point.fpr <= fpr_level) best = std::max(best, point.tpr);
  }
  return best;
}

std::vector<double> ThresholdCandidates(std::span<const double> scores) {
  std::vector<double> values(scores.begin(), scores.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> out;
  if (values.empty()) return out;
  out.push_back(values.front() - std::max(1.0, std::abs(values.front())));
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    out.push_back(Midpoint(values[i], values[i + 1]));
  }
  out.push_back(values.back() + std::max(1.0, std::abs(values.back())));
  return out;
}

ThresholdFit FitThreshold(std::span<const double> scores,
                          std::span<const Label> labels) {
  const ScoreTable t = Tabulate(scores, labels);
  const double p = static_cast<double>(t.total_pos);
  const double n = static_cast<double>(t.total_neg);
  const std::vector<double> candidates = ThresholdCandidates(scores);

  // candidates[c] sits just below values[c]: everything at index >= c is
  // classified LGT.
  std::vector<uint64_t> pos_at_or_above(t.values.size() + 1, 0);
  std::vector<uint64_t> neg_at_or_above(t.values.size() + 1, 0);
  for (size_t i = t.values.size(); i-- > 0;) {
    pos_at_or_above[i] = pos_at_or_above[i + 1] + t.pos[i];
    neg_at_or_above[i] = neg_at_or_above[i + 1] + t.neg[i];
  }
  ThresholdFit best{candidates.front(), -1.0};
  for (size_t c = 0; c < candidates.size(); ++c) {
    const double tpr = static_cast<double>(pos_at_or_above[c]) / p;
    const double fpr = static_cast<double>(neg_at_or_above[c]) / n;
    const double objective = tpr + (1.0 - fpr);
    if (objective > best.objective) best = {candidates[c], objective};
  }
  return best;
}

ClassStats ComputeClassStats(std::span<const double> scores) {
  ClassStats s;
  s.count = scores.size();
  if (scores.empty()) return s;
  s.min = *std::min_element(scores.begin(), scores.end());
  s.max = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double x : scores) sum += x;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double sq = 0.0;
    for (double x : scores) sq += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.count - 1));
  }
  return s;
}

CalibrationResult Calibrate(std::span<const double> scores,
                            std::span<const Label> labels,
                            std::span<const double> fpr_levels) {
  CalibrationResult r;
  const ThresholdFit fit = FitThreshold(scores, labels);
  r.threshold = fit.threshold;
  r.objective = fit.objective;
  r.roc = ComputeRoc(scores, labels);
  r.auroc = Auroc(scores, labels);
  for (double level : fpr_levels) {
    r.tpr_at_fpr[level] = TprAtFpr(scores, labels, level);
  }
  std::vector<double> hwt;
  std::vector<double> lgt;
  for (size_t i = 0; i < scores.size(); ++i) {
    (labels[i] == Label::kLgt ? lgt : hwt).push_back(scores[i]);
  }
  r.hwt = ComputeClassStats(hwt);
  r.lgt = ComputeClassStats(lgt);
  return r;
}

namespace {

using nlohmann::json;

json StatsToJson(const ClassStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.std},
          {"min", s.min},     {"max", s.max}};
}

ClassStats StatsFromJson(const json& j) {
  ClassStats s;
  s.count = j.at("count").get<size_t>();
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  return s;
}

}  // namespace

std::string CalibrationToJson(const CalibrationResult& r) {
  json roc = json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr});
  json tpr = json::object();
  for (const auto& [level, value] : r.tpr_at_fpr) tpr[json(level).dump()] = value;
  const json doc = {{"threshold", r.threshold},
                    {"objective", r.objective},
                    {"auroc", r.auroc},
                    {"tpr_at_fpr", std::move(tpr)},
                    {"roc", std::move(roc)},
                    {"class_stats",
                     {{"HWT", StatsToJson(r.hwt)}, {"LGT", StatsToJson(r.lgt)}}}};
  return doc.dump(2) + "\n";
}

CalibrationResult CalibrationFromJson(const std::string& text) {
  CalibrationResult r;
  try {
    const json doc = json::parse(text);
    r.threshold = doc.at("threshold").get<double>();
    r.objective = doc.at("objective").get<double>();
    r.auroc = doc.at("auroc").get<double>();
    for (const auto& [key, value] : doc.at("tpr_at_fpr").items()) {
      r.tpr_at_fpr[std::stod(key)] = value.get<double>();
    }
    for (const auto& p : doc.at("roc")) {
      r.roc.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    r.hwt = StatsFromJson(doc.at("class_stats").at("HWT"));
    r.lgt = StatsFromJson(doc.at("class_stats").at("LGT"));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad calibration file: ") + e.what());
  }
  if (!std::isfinite(r.threshold)) {
    Fail(ErrorCode::kFormat, "calibration threshold is not finite");
  }
  return r;
}

}  // namespace probedet
