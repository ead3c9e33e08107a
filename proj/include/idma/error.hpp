// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idma {

enum class Errc {
  // engine configuration
  InvalidWidth,
  NoReadPort,
  NoWritePort,
  ZeroCapacity,
  DuplicatePort,
  UnsupportedDirection,
  InvalidOption,
  ConfigError,
  UnknownPreset,
  UnknownProtocol,
  // descriptors and mid-ends
  ZeroLengthRejected,
  AddressOutOfRange,
  IndivisibleTotal,
  UnsplitPiece,
  InvalidArgument,
  // front-ends
  UnmappedOffset,
  Misaligned,
  Unmapped,
  ChainTooLong,
  // simulation
  CapacityExceeded,
  ZeroSeed,
  NoPendingError,
  ContractViolation,
  Deadlock,
  // metrics and cost model
  EmptyWindow,
  UnfittedModel,
  Underdetermined,
};

std::string_view to_string(Errc code);

// Contract violations are caller bugs detected at run time (illegal bursts fed
// to a manager, capacity overruns, deadlock). Everything else is an input error.
bool is_contract_violation(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace idma
