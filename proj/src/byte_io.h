#pragma once

// Little-endian encoding helpers shared by the RGAF and RGPM codecs.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probedet/errors.h"

namespace probedet::internal {

class ByteWriter {
 public:
  void Bytes(std::string_view s) {
    const auto* p = reinterpret_cast<const std::byte*>(s.data());
    buf_.insert(buf_.end(), p, p + s.size());
  }
  void U8(uint8_t v) { buf_.push_back(static_cast<std::byte>(v)); }
  void U16(uint16_t v) { Unsigned(v, 2); }
  void U32(uint32_t v) { Unsigned(v, 4); }
  void F32(float v) { U32(std::bit_cast<uint32_t>(v)); }
  void F64(double v) { Unsigned(std::bit_cast<uint64_t>(v), 8); }

  std::vector<std::byte>& buffer() { return buf_; }
  size_t size() const { return buf_.size(); }

 private:
  void Unsigned(uint64_t v, int width) {
    for (int i = 0; i < width; ++i) {
      buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
    }
  }

  std::vector<std::byte> buf_;
};

// Bounds-checked reader; running off the end raises `truncation_code`.
class ByteReader {
 public:
  ByteReader(std::span<const std::byte> data, ErrorCode truncation_code)
      : data_(data), truncation_code_(truncation_code) {}

  std::string Bytes(size_t n) {
    Require(n);
    std::string out(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return out;
  }
  uint8_t U8() { return static_cast<uint8_t>(Unsigned(1)); }
  uint16_t U16() { return static_cast<uint16_t>(Unsigned(2)); }
  uint32_t U32() { return static_cast<uint32_t>(Unsigned(4)); }
  float F32() { return std::bit_cast<float>(U32()); }
  double F64() { return std::bit_cast<double>(Unsigned(8)); }

  size_t position() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  void Require(size_t n) const {
    if (n > remaining()) {
      Fail(truncation_code_, "unexpected end of data");
    }
  }

 private:
  uint64_t Unsigned(int width) {
    Require(static_cast<size_t>(width));
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += static_cast<size_t>(width);
    return v;
  }

  std::span<const std::byte> data_;
  size_t pos_ = 0;
  ErrorCode truncation_code_;
};

std::vector<std::byte> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::span<const std::byte> data);

}  // namespace probedet::internal
