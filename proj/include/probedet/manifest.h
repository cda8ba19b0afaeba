#pragma once

#include <optional>
#include <string>
#include <vector>

#include "probedet/tensor_store.h"

namespace probedet {

struct ManifestEntry {
  std::string file;  // relative to the manifest's directory unless absolute
  std::string sample_id;
  Label label = Label::kUnknown;
  std::optional<std::string> pair_id;
};

struct DatasetManifest {
  std::string dataset_name;
  std::string surrogate_id;
  std::string tokenizer_id;
  double activation_ratio = 0.1;
  LayerRange layer_range;
  std::vector<ManifestEntry> entries;

  // Directory that relative entry paths resolve against. Not serialized.
  std::string base_dir;

  std::string ResolvePath(const ManifestEntry& entry) const;
};

// One pair_id's two members, in manifest order of first appearance.
struct ManifestPair {
  std::string pair_id;
  const ManifestEntry* lgt = nullptr;
  const ManifestEntry* hwt = nullptr;
};

DatasetManifest ParseManifest(const std::string& json_text,
                              const std::string& base_dir);
DatasetManifest LoadManifest(const std::string& path);
std::string ManifestToJson(const DatasetManifest& manifest);
void SaveManifest(const DatasetManifest& manifest, const std::string& path);

// Returns human-readable violations; empty means the manifest is valid.
// With `strict_pairs`, every entry must carry a pair_id.
std::vector<std::string> ValidateManifest(const DatasetManifest& manifest,
                                          bool strict_pairs);

// Complete HWT/LGT pairs ordered by first appearance of the pair_id.
// Assumes the manifest validated.
std::vector<ManifestPair> CollectPairs(const DatasetManifest& manifest);

}  // namespace probedet
