#include "amp/error.h"

namespace amp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid-argument";
    case ErrorKind::kContractViolation:
      return "contract-violation";
    case ErrorKind::kNumericFailure:
      return "numeric-failure";
    case ErrorKind::kProtocolViolation:
      return "protocol-violation";
    case ErrorKind::kProtocolFailure:
      return "protocol-failure";
    case ErrorKind::kParseError:
      return "parse-error";
    case ErrorKind::kOutOfDomain:
      return "out-of-domain";
  }
  return "unknown";
}

}  // namespace amp
