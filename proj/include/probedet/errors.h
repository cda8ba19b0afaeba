#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace probedet {

// Stable, machine-readable failure categories. The string form of each code
// is part of the CLI and HTTP contract and must not change.
enum class ErrorCode {
  kArgument,
  kShape,
  kFormat,
  kCorruption,
  kUnsupportedVersion,
  kIo,
  kEmptyDataset,
  kInvalidManifest,
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace probedet
