#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace probedet {

// IEEE 802.3 CRC-32 (reflected, polynomial 0xEDB88320), as used by zlib/PNG.
uint32_t Crc32(std::span<const std::byte> data);

}  // namespace probedet
