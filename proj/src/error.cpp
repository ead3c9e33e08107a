// SPDX-License-Identifier: Apache-2.0
#include "idma/error.hpp"

namespace idma {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidWidth: return "InvalidWidth";
    case Errc::NoReadPort: return "NoReadPort";
    case Errc::NoWritePort: return "NoWritePort";
    case Errc::ZeroCapacity: return "ZeroCapacity";
    case Errc::DuplicatePort: return "DuplicatePort";
    case Errc::UnsupportedDirection: return "UnsupportedDirection";
    case Errc::InvalidOption: return "InvalidOption";
    case Errc::ConfigError: return "ConfigError";
    case Errc::UnknownPreset: return "UnknownPreset";
    case Errc::UnknownProtocol: return "UnknownProtocol";
    case Errc::ZeroLengthRejected: return "ZeroLengthRejected";
    case Errc::AddressOutOfRange: return "AddressOutOfRange";
    case Errc::IndivisibleTotal: return "IndivisibleTotal";
    case Errc::UnsplitPiece: return "UnsplitPiece";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UnmappedOffset: return "UnmappedOffset";
    case Errc::Misaligned: return "Misaligned";
    case Errc::Unmapped: return "Unmapped";
    case Errc::ChainTooLong: return "ChainTooLong";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::ZeroSeed: return "ZeroSeed";
    case Errc::NoPendingError: return "NoPendingError";
    case Errc::ContractViolation: return "ContractViolation";
    case Errc::Deadlock: return "Deadlock";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::UnfittedModel: return "UnfittedModel";
    case Errc::Underdetermined: return "Underdetermined";
  }
  return "Unknown";
}

bool is_contract_violation(Errc code) {
  return code == Errc::ContractViolation || code == Errc::Deadlock ||
         code == Errc::CapacityExceeded;
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace idma
