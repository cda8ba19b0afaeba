#include "probedet/model_io.h"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "byte_io.h"
#include "json.hpp"
#include "probedet/crc32.h"
#include "probedet/errors.h"

namespace probedet {

using nlohmann::json;

namespace {

json FitStatsToJson(const FitStats& s) {
  return {{"pair_count", s.pair_count},
          {"difference_rows", s.difference_rows},
          {"activation_ratio", s.activation_ratio},
          {"mean_score_hwt", s.mean_score_hwt},
          {"mean_score_lgt", s.mean_score_lgt},
          {"degenerate", s.degenerate},
          {"row_mode", s.row_mode},
          {"centering", s.centering}};
}

FitStats FitStatsFromJson(const json& j) {
  FitStats s;
  s.pair_count = j.at("pair_count").get<uint64_t>();
  s.difference_rows = j.at("difference_rows").get<uint64_t>();
  s.activation_ratio = j.at("activation_ratio").get<double>();
  s.mean_score_hwt = j.at("mean_score_hwt").get<double>();
  s.mean_score_lgt = j.at("mean_score_lgt").get<double>();
  s.degenerate = j.at("degenerate").get<bool>();
  s.row_mode = j.at("row_mode").get<std::string>();
  s.centering = j.at("centering").get<std::string>();
  return s;
}

}  // namespace

std::vector<std::byte> SerializeModel(const ProbingModel& model) {
  const json header = {{"format", "RGPM"},
                       {"layer_range", {model.layer_range.lo, model.layer_range.hi}},
                       {"dim", model.dim},
                       {"orientation_applied", model.orientation_applied},
                       {"fit_stats", FitStatsToJson(model.fit_stats)}};
  const std::string header_text = header.dump();

  internal::ByteWriter w;
  w.Bytes(kModelMagic);
  w.U16(kModelVersion);
  w.U32(static_cast<uint32_t>(header_text.size()));
  w.Bytes(header_text);
  w.U32(model.layer_count());
  w.U32(model.dim);
  for (uint32_t i = 0; i < model.layer_count(); ++i) {
    for (double x : model.vectors[i]) w.F32(static_cast<float>(x));
    w.F64(model.explained_variance[i]);
    for (double x : model.means[i]) w.F64(x);
  }
  w.U32(Crc32(w.buffer()));
  return std::move(w.buffer());
}

ProbingModel DeserializeModel(std::span<const std::byte> bytes) {
  if (bytes.size() < kModelMagic.size() ||
      std::memcmp(bytes.data(), kModelMagic.data(), kModelMagic.size()) != 0) {
    Fail(ErrorCode::kFormat, "bad magic: not an RGPM model file");
  }
  if (bytes.size() < 4) Fail(ErrorCode::kCorruption, "truncated model");
  const size_t body = bytes.size() - 4;
  internal::ByteReader crc_reader(bytes.subspan(body), ErrorCode::kCorruption);
  if (crc_reader.U32() != Crc32(bytes.first(body))) {
    Fail(ErrorCode::kCorruption, "model CRC32 mismatch");
  }

  internal::ByteReader r(bytes.first(body), ErrorCode::kCorruption);
  r.Bytes(kModelMagic.size());
  const uint16_t version = r.U16();
  if (version > kModelVersion) {
    Fail(ErrorCode::kUnsupportedVersion,
         "RGPM version " + std::to_string(version) + " is not supported");
  }
  const uint32_t header_len = r.U32();
  const std::string header_text = r.Bytes(header_len);

  ProbingModel model;
  try {
    const json header = json::parse(header_text);
    const auto range = header.at("layer_range").get<std::vector<uint32_t>>();
    if (range.size() != 2) Fail(ErrorCode::kFormat, "bad layer_range");
    model.layer_range = {range[0], range[1]};
    model.dim = header.at("dim").get<uint32_t>();
    model.orientation_applied = header.at("orientation_applied").get<bool>();
    model.fit_stats = FitStatsFromJson(header.at("fit_stats"));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad model header: ") + e.what());
  }
  const uint32_t layers = r.U32();
  const uint32_t dim = r.U32();
  if (model.layer_range.lo < 1 || model.layer_range.lo > model.layer_range.hi ||
      layers != model.layer_count() || dim != model.dim || dim == 0) {
    Fail(ErrorCode::kFormat, "model header disagrees with its payload");
  }
  const size_t per_layer = static_cast<size_t>(dim) * 12 + 8;
  if (r.remaining() != per_layer * layers) {
    Fail(ErrorCode::kCorruption, "model payload has the wrong size");
  }
  for (uint32_t i = 0; i < layers; ++i) {
    std::vector<double> v(dim);
    double norm = 0.0;
    for (double& x : v) {
      x = r.F32();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      Fail(ErrorCode::kFormat, "probing vector is not a finite nonzero vector");
    }
    for (double& x : v) x /= norm;
    model.vectors.push_back(std::move(v));
    model.explained_variance.push_back(r.F64());
    std::vector<double> mean(dim);
    for (double& x : mean) x = r.F64();
    model.means.push_back(std::move(mean));
  }
  return model;
}

void SaveModel(const ProbingModel& model, const std::string& path) {
  internal::WriteFileBytes(path, SerializeModel(model));
}

ProbingModel LoadModel(const std::string& path) {
  return DeserializeModel(internal::ReadFileBytes(path));
}

ProbingModel StorageRoundTrip(const ProbingModel& model) {
  return DeserializeModel(SerializeModel(model));
}

std::string ModelVersion(std::span<const std::byte> serialized) {
  char buf[16];
  const size_t body = serialized.size() < 4 ? 0 : serialized.size() - 4;
  std::snprintf(buf, sizeof(buf), "%08x", Crc32(serialized.first(body)));
  return std::string("rgpm1-") + buf;
}

}  // namespace probedet
