#include "probedet/manifest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "probedet/errors.h"

namespace probedet {

using nlohmann::json;

std::string DatasetManifest::ResolvePath(const ManifestEntry& entry) const {
  std::filesystem::path p(entry.file);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

namespace {

template <typename T>
T Field(const json& obj, const char* key) {
  if (!obj.contains(key)) {
    Fail(ErrorCode::kInvalidManifest,
         std::string("manifest is missing key '") + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidManifest,
         std::string("manifest key '") + key + "': " + e.what());
  }
}

}  // namespace

DatasetManifest ParseManifest(const std::string& json_text,
                              const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kInvalidManifest,
         std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    Fail(ErrorCode::kInvalidManifest, "manifest must be a JSON object");
  }
  DatasetManifest m;
  m.base_dir = base_dir;
  m.dataset_name = Field<std::string>(doc, "dataset_name");
  m.surrogate_id = Field<std::string>(doc, "surrogate_id");
  m.tokenizer_id = Field<std::string>(doc, "tokenizer_id");
  m.activation_ratio = Field<double>(doc, "activation_ratio");
  const auto range = Field<std::vector<int64_t>>(doc, "layer_range");
  if (range.size() != 2 || range[0] < 0 || range[1] < 0 ||
      range[0] > UINT32_MAX || range[1] > UINT32_MAX) {
    Fail(ErrorCode::kInvalidManifest,
         "layer_range must be two non-negative integers");
  }
  m.layer_range = {static_cast<uint32_t>(range[0]),
                   static_cast<uint32_t>(range[1])};
  const json& entries = doc.contains("entries") ? doc.at("entries") : json();
  if (!entries.is_array()) {
    Fail(ErrorCode::kInvalidManifest, "manifest 'entries' must be an array");
  }
  for (const json& e : entries) {
    if (!e.is_object()) {
      Fail(ErrorCode::kInvalidManifest, "manifest entry must be an object");
    }
    ManifestEntry entry;
    entry.file = Field<std::string>(e, "file");
    entry.sample_id = Field<std::string>(e, "sample_id");
    try {
      entry.label = ParseLabel(Field<std::string>(e, "label"));
    } catch (const Error& err) {
      Fail(ErrorCode::kInvalidManifest, err.what());
    }
    if (e.contains("pair_id") && !e.at("pair_id").is_null()) {
      entry.pair_id = Field<std::string>(e, "pair_id");
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

DatasetManifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open manifest '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseManifest(ss.str(),
                       std::filesystem::path(path).parent_path().string());
}

std::string ManifestToJson(const DatasetManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"file", e.file},
                       {"sample_id", e.sample_id},
                       {"label", std::string(LabelName(e.label))},
                       {"pair_id", e.pair_id ? json(*e.pair_id) : json()}});
  }
  json doc = {{"dataset_name", m.dataset_name},
              {"surrogate_id", m.surrogate_id},
              {"tokenizer_id", m.tokenizer_id},
              {"activation_ratio", m.activation_ratio},
              {"layer_range", {m.layer_range.lo, m.layer_range.hi}},
              {"entries", std::move(entries)}};
  return doc.dump(2) + "\n";
}

void SaveManifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write manifest '" + path + "'");
  out << ManifestToJson(manifest);
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

std::vector<std::string> ValidateManifest(const DatasetManifest& m,
                                          bool strict_pairs) {
  std::vector<std::string> violations;
  if (!(m.activation_ratio > 0.0 && m.activation_ratio <= 1.0)) {
    violations.push_back("activation_ratio must lie in (0, 1], got " +
                         std::to_string(m.activation_ratio));
  }
  if (m.layer_range.lo < 1 || m.layer_range.lo > m.layer_range.hi) {
    violations.push_back("layer_range must satisfy 1 <= lo <= hi");
  }

  std::set<std::string> files;
  struct Counts {
    int hwt = 0;
    int lgt = 0;
    int unknown = 0;
  };
  std::map<std::string, Counts> pairs;
  std::vector<std::string> pair_order;
  for (size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    if (!files.insert(e.file).second) {
      violations.push_back("duplicate file path '" + e.file + "'");
    }
    if (!e.pair_id) {
      if (strict_pairs) {
        violations.push_back("entry " + std::to_string(i) + " ('" +
                             e.sample_id + "') has no pair_id");
      }
      continue;
    }
    auto [it, inserted] = pairs.try_emplace(*e.pair_id);
    if (inserted) pair_order.push_back(*e.pair_id);
    switch (e.label) {
      case Label::kHwt:
        ++it->second.hwt;
        break;
      case Label::kLgt:
        ++it->second.lgt;
        break;
      case Label::kUnknown:
        ++it->second.unknown;
        break;
    }
  }
  for (const auto& id : pair_order) {
    const Counts& c = pairs.at(id);
    if (c.hwt != 1 || c.lgt != 1 || c.unknown != 0) {
      violations.push_back("pair '" + id +
                           "' must have exactly one HWT and one LGT entry "
                           "(found " +
                           std::to_string(c.hwt) + " HWT, " +
                           std::to_string(c.lgt) + " LGT, " +
                           std::to_string(c.unknown) + " UNKNOWN)");
    }
  }
  return violations;
}

std::vector<ManifestPair> CollectPairs(const DatasetManifest& m) {
  std::vector<ManifestPair> out;
  std::map<std::string, size_t> index;
  for (const auto& e : m.entries) {
    if (!e.pair_id) continue;
    auto [it, inserted] = index.try_emplace(*e.pair_id, out.size());
    if (inserted) out.push_back({*e.pair_id, nullptr, nullptr});
    ManifestPair& p = out[it->second];
    if (e.label == Label::kLgt) p.lgt = &e;
    if (e.label == Label::kHwt) p.hwt = &e;
  }
  std::erase_if(out, [](const ManifestPair& p) { return !p.lgt || !p.hwt; });
  return out;
}

}  // namespace probedet
