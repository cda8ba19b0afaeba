#include "probedet/tensor_store.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "byte_io.h"
#include "probedet/crc32.h"
#include "probedet/errors.h"

namespace probedet {

std::string_view LabelName(Label label) {
  switch (label) {
    case Label::kHwt:
      return "HWT";
    case Label::kLgt:
      return "LGT";
    case Label::kUnknown:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

Label ParseLabel(std::string_view name) {
  if (name == "HWT") return Label::kHwt;
  if (name == "LGT") return Label::kLgt;
  if (name == "UNKNOWN") return Label::kUnknown;
  Fail(ErrorCode::kArgument, "unknown label '" + std::string(name) + "'");
}

ActivationTensor::ActivationTensor(std::string sample_id, Label label,
                                   uint32_t layers, uint32_t tokens,
                                   uint32_t dim, std::vector<float> values)
    : sample_id_(std::move(sample_id)),
      label_(label),
      layers_(layers),
      tokens_(tokens),
      dim_(dim),
      values_(std::move(values)) {
  if (layers_ == 0 || tokens_ == 0 || dim_ == 0) {
    Fail(ErrorCode::kArgument, "tensor dimensions must all be >= 1");
  }
  const size_t expected = static_cast<size_t>(layers_) * tokens_ * dim_;
  if (values_.size() != expected) {
    Fail(ErrorCode::kArgument,
         "tensor holds " + std::to_string(values_.size()) +
             " values, expected " + std::to_string(expected));
  }
}

bool ActivationTensor::AllFinite() const {
  for (float v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool ActivationTensor::operator==(const ActivationTensor& other) const {
  return sample_id_ == other.sample_id_ && label_ == other.label_ &&
         layers_ == other.layers_ && tokens_ == other.tokens_ &&
         dim_ == other.dim_ &&
         std::memcmp(values_.data(), other.values_.data(),
                     values_.size() * sizeof(float)) == 0;
}

std::vector<std::byte> EncodeActivation(const ActivationTensor& tensor) {
  if (!tensor.AllFinite()) {
    Fail(ErrorCode::kArgument,
         "tensor '" + tensor.sample_id() + "' contains non-finite values");
  }
  internal::ByteWriter w;
  w.Bytes(kActivationMagic);
  w.U16(kActivationVersion);
  w.U32(tensor.layers());
  w.U32(tensor.tokens());
  w.U32(tensor.dim());
  w.U32(static_cast<uint32_t>(tensor.sample_id().size()));
  w.Bytes(tensor.sample_id());
  w.U8(static_cast<uint8_t>(tensor.label()));
  for (float v : tensor.values()) w.F32(v);
  w.U32(Crc32(w.buffer()));
  return std::move(w.buffer());
}

ActivationTensor DecodeActivation(std::span<const std::byte> bytes) {
  if (bytes.size() < kActivationMagic.size() ||
      std::memcmp(bytes.data(), kActivationMagic.data(),
                  kActivationMagic.size()) != 0) {
    Fail(ErrorCode::kFormat, "bad magic: not an RGAF activation file");
  }
  internal::ByteReader r(bytes, ErrorCode::kCorruption);
  r.Bytes(kActivationMagic.size());
  const uint16_t version = r.U16();
  if (version > kActivationVersion) {
    Fail(ErrorCode::kUnsupportedVersion,
         "RGAF version " + std::to_string(version) + " is not supported");
  }
  if (version == 0) {
    Fail(ErrorCode::kFormat, "RGAF version 0 is invalid");
  }
  const uint32_t layers = r.U32();
  const uint32_t tokens = r.U32();
  const uint32_t dim = r.U32();
  const uint32_t id_len = r.U32();
  std::string sample_id = r.Bytes(id_len);
  const uint8_t label_byte = r.U8();

  const unsigned __int128 count =
      static_cast<unsigned __int128>(layers) * tokens * dim;
  const unsigned __int128 needed = count * 4 + 4;
  if (needed != r.remaining()) {
    Fail(ErrorCode::kCorruption,
         needed > r.remaining() ? "truncated payload" : "trailing bytes");
  }
  const size_t body = r.position() + static_cast<size_t>(count) * 4;
  const uint32_t expected_crc = Crc32(bytes.first(body));
  std::vector<float> values(static_cast<size_t>(count));
  for (float& v : values) v = r.F32();
  if (r.U32() != expected_crc) {
    Fail(ErrorCode::kCorruption, "CRC32 mismatch");
  }

  if (label_byte > static_cast<uint8_t>(Label::kUnknown)) {
    Fail(ErrorCode::kFormat, "invalid label byte");
  }
  if (layers == 0 || tokens == 0 || dim == 0) {
    Fail(ErrorCode::kFormat, "zero-sized tensor dimension");
  }
  ActivationTensor tensor(std::move(sample_id), static_cast<Label>(label_byte),
                          layers, tokens, dim, std::move(values));
  if (!tensor.AllFinite()) {
    Fail(ErrorCode::kFormat, "payload contains non-finite values");
  }
  return tensor;
}

void WriteActivationFile(const ActivationTensor& tensor,
                         const std::string& path) {
  const auto bytes = EncodeActivation(tensor);
  internal::WriteFileBytes(path, bytes);
}

ActivationTensor ReadActivationFile(const std::string& path) {
  return DecodeActivation(internal::ReadFileBytes(path));
}

namespace internal {

std::vector<std::byte> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  if (size < 0) Fail(ErrorCode::kIo, "cannot size '" + path + "'");
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> data(static_cast<size_t>(size));
  if (!data.empty() &&
      !in.read(reinterpret_cast<char*>(data.data()), size)) {
    Fail(ErrorCode::kIo, "read failed for '" + path + "'");
  }
  return data;
}

void WriteFileBytes(const std::string& path, std::span<const std::byte> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace internal
}  // namespace probedet
