#include "probedet/engine_config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "probedet/errors.h"

namespace probedet {

using nlohmann::json;

LayerRange ParseLayerRange(std::string_view text) {
  const auto colon = text.find(':');
  auto number = [&](std::string_view part) {
    uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      Fail(ErrorCode::kConfig, "bad layer range '" + std::string(text) +
                                   "', expected LO:HI");
    }
    return v;
  };
  if (colon == std::string_view::npos) {
    Fail(ErrorCode::kConfig,
         "bad layer range '" + std::string(text) + "', expected LO:HI");
  }
  const LayerRange range{number(text.substr(0, colon)),
                         number(text.substr(colon + 1))};
  if (range.lo < 1 || range.lo > range.hi) {
    Fail(ErrorCode::kConfig, "layer range must satisfy 1 <= LO <= HI");
  }
  return range;
}

void ValidateEngineConfig(const EngineConfig& c) {
  if (c.ratio && !(*c.ratio > 0.0 && *c.ratio <= 1.0)) {
    Fail(ErrorCode::kConfig, "ratio must lie in (0, 1]");
  }
  if (!(c.fpr_level >= 0.0 && c.fpr_level <= 1.0)) {
    Fail(ErrorCode::kConfig, "fpr_level must lie in [0, 1]");
  }
  if (c.rounds < 1) Fail(ErrorCode::kConfig, "rounds must be >= 1");
  if (c.train_pairs < 1 || c.test_pairs < 1) {
    Fail(ErrorCode::kConfig, "train_pairs and test_pairs must be >= 1");
  }
  if (c.bins < 1) Fail(ErrorCode::kConfig, "bins must be >= 1");
  if (c.threshold && !std::isfinite(*c.threshold)) {
    Fail(ErrorCode::kConfig, "threshold must be finite");
  }
}

EngineConfig ParseEngineConfig(const std::string& json_text) {
  EngineConfig c;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) Fail(ErrorCode::kConfig, "config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "ratio") {
        c.ratio = value.get<double>();
      } else if (key == "layers") {
        if (value.is_string()) {
          c.layers = ParseLayerRange(value.get<std::string>());
        } else {
          const auto v = value.get<std::vector<uint32_t>>();
          if (v.size() != 2) Fail(ErrorCode::kConfig, "layers needs [lo, hi]");
          c.layers = ParseLayerRange(std::to_string(v[0]) + ":" + std::to_string(v[1]));
        }
      } else if (key == "fpr_level") {
        c.fpr_level = value.get<double>();
      } else if (key == "rounds") {
        c.rounds = value.get<uint32_t>();
      } else if (key == "seed") {
        c.seed = value.get<uint64_t>();
      } else if (key == "train_pairs") {
        c.train_pairs = value.get<uint32_t>();
      } else if (key == "test_pairs") {
        c.test_pairs = value.get<uint32_t>();
      } else if (key == "threshold") {
        if (!value.is_null()) c.threshold = value.get<double>();
      } else if (key == "bins") {
        c.bins = value.get<int>();
      } else if (key == "out") {
        c.out = value.get<std::string>();
      } else if (key == "metrics_out") {
        c.metrics_out = value.get<std::string>();
      } else {
        Fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("bad config value: ") + e.what());
  }
  ValidateEngineConfig(c);
  return c;
}

EngineConfig LoadEngineConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseEngineConfig(ss.str());
}

}  // namespace probedet
