// SPDX-License-Identifier: Apache-2.0
//
// Transfer legalizer: turns one 1D transfer into protocol-legal read and
// write bursts. Each side is tiled greedily (largest legal burst first) and
// independently, since source and destination alignment differ.
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "idma/core.hpp"

namespace idma {

// Pull-based burst generator for one side of a transfer.
class BurstIterator {
 public:
  BurstIterator(Addr addr, std::uint64_t length, ProtocolId protocol, unsigned dw,
                std::optional<std::uint64_t> user_cap, Side side = Side::Read);

  bool done() const { return remaining_ == 0; }
  std::uint64_t remaining() const { return remaining_; }
  // Length the next burst would have, optionally clamped further.
  std::uint64_t next_length() const;
  std::uint64_t clamped_length(std::uint64_t clamp) const;
  LegalBurst next();
  LegalBurst next(std::uint64_t clamp);

 private:
  Addr addr_;
  std::uint64_t remaining_;
  ProtocolId protocol_;
  unsigned dw_;
  std::optional<std::uint64_t> cap_;
  Side side_;
  std::uint64_t seq_ = 0;
};

std::vector<LegalBurst> legalize_side(Addr addr, std::uint64_t length, ProtocolId protocol,
                                      unsigned dw, std::optional<std::uint64_t> user_cap,
                                      Side side = Side::Read);

struct LegalizedTransfer {
  std::vector<LegalBurst> read_bursts;
  std::vector<LegalBurst> write_bursts;
  TransferDescriptor1D parent;
};

// Effective per-side burst cap: the user cap combined with the side's
// reduce_len exponent (2^n beats).
std::optional<std::uint64_t> side_cap(const BackendOptions& options, Side side, unsigned dw);

// Throws ZeroLengthRejected for empty transfers when the engine rejects them.
LegalizedTransfer legalize(const TransferDescriptor1D& d, const EngineConfig& cfg);

// Both burst streams of one transfer, consumed independently by the read and
// write halves of the transport layer. With decouple_rw off the two sides
// are cut at identical lengths. Without a hardware legalizer the transfer is
// forwarded as one burst per side.
class TransferLegalizer {
 public:
  TransferLegalizer(const TransferDescriptor1D& d, unsigned dw, bool hardware);

  bool done(Side side) const;
  const LegalBurst& peek(Side side);
  LegalBurst pop(Side side);

 private:
  void refill(Side side);
  std::deque<LegalBurst>& queue(Side side) { return side == Side::Read ? reads_ : writes_; }
  const std::deque<LegalBurst>& queue(Side side) const {
    return side == Side::Read ? reads_ : writes_;
  }

  bool coupled_;
  bool passthrough_;
  BurstIterator src_;
  BurstIterator dst_;
  std::deque<LegalBurst> reads_;
  std::deque<LegalBurst> writes_;
};

}  // namespace idma
