#include "probedet/crc32.h"

#include <zlib.h>

#include <algorithm>
#include <limits>

namespace probedet {

uint32_t Crc32(std::span<const std::byte> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(data.data());
  size_t remaining = data.size();
  while (remaining > 0) {
    const uInt chunk = static_cast<uInt>(
        std::min<size_t>(remaining, std::numeric_limits<uInt>::max()));
    crc = crc32(crc, p, chunk);
    p += chunk;
    remaining -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

}  // namespace probedet
