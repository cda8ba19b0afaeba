#include "probedet/errors.h"

namespace probedet {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kArgument:
      return "ARGUMENT_ERROR";
    case ErrorCode::kShape:
      return "SHAPE_MISMATCH";
    case ErrorCode::kFormat:
      return "FORMAT_ERROR";
    case ErrorCode::kCorruption:
      return "CORRUPTION_ERROR";
    case ErrorCode::kUnsupportedVersion:
      return "UNSUPPORTED_VERSION";
    case ErrorCode::kIo:
      return "IO_ERROR";
    case ErrorCode::kEmptyDataset:
      return "EMPTY_DATASET";
    case ErrorCode::kInvalidManifest:
      return "INVALID_MANIFEST";
    case ErrorCode::kConfig:
      return "CONFIG_ERROR";
  }
  return "UNKNOWN_ERROR";
}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace probedet
