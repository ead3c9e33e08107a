// SPDX-License-Identifier: Apache-2.0
//
// Front-ends: the control plane that turns core requests into transfers.
//
// reg_32_3d register map (32-bit registers, byte offsets):
//   0x00 src_address     0x04 dst_address     0x08 transfer_length
//   0x0C status (RO)     0x10 configuration   0x14 transfer_id (RO, launches)
//   0x18 dim2 src_stride 0x1C dim2 dst_stride 0x20 dim2 repetitions
//   0x24 dim3 src_stride 0x28 dim3 dst_stride 0x2C dim3 repetitions
//
// configuration / backend_config bits:
//   [2:0] source protocol   [5:3] destination protocol   [7:6] error action
//   all other bits are reserved and must be zero
//
// desc_64 descriptor: five little-endian 64-bit words, 8-byte aligned:
//   next_ptr, backend_config, length, src_addr, dst_addr
// next_ptr == kDescEnd terminates the chain.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "idma/core.hpp"
#include "idma/memsys.hpp"

namespace idma {

namespace reg {
inline constexpr std::uint32_t kSrc = 0x00;
inline constexpr std::uint32_t kDst = 0x04;
inline constexpr std::uint32_t kLength = 0x08;
inline constexpr std::uint32_t kStatus = 0x0C;
inline constexpr std::uint32_t kConfig = 0x10;
inline constexpr std::uint32_t kTransferId = 0x14;
inline constexpr std::uint32_t kDim2SrcStride = 0x18;
inline constexpr std::uint32_t kDim2DstStride = 0x1C;
inline constexpr std::uint32_t kDim2Reps = 0x20;
inline constexpr std::uint32_t kDim3SrcStride = 0x24;
inline constexpr std::uint32_t kDim3DstStride = 0x28;
inline constexpr std::uint32_t kDim3Reps = 0x2C;
}  // namespace reg

struct BackendConfigBits {
  ProtocolId src_protocol = ProtocolId::Axi;
  ProtocolId dst_protocol = ProtocolId::Axi;
  ErrorAction error_action = ErrorAction::Continue;

  bool operator==(const BackendConfigBits&) const = default;
};

std::uint64_t encode_backend_config(const BackendConfigBits& b);
// UnknownProtocol / InvalidOption on bad encodings.
BackendConfigBits decode_backend_config(std::uint64_t raw);

struct RegFileState {
  std::uint32_t src_address = 0;
  std::uint32_t dst_address = 0;
  std::uint32_t transfer_length = 0;
  std::uint32_t configuration = 0;
  std::array<std::uint32_t, 2> src_stride{};  // dims 2 and 3
  std::array<std::uint32_t, 2> dst_stride{};
  std::array<std::uint32_t, 2> reps{};
  std::uint64_t next_id = 1;
  std::uint64_t last_completed_id = 0;

  bool operator==(const RegFileState&) const = default;
};

struct RegLaunch {
  std::uint64_t id = 0;
  NdTransferDescriptor desc;
};

struct RegAccessResult {
  RegFileState state;
  std::uint32_t value = 0;
  std::optional<RegLaunch> launch;
};

// UnmappedOffset for offsets outside the map (and writes to read-only ones).
RegAccessResult reg_access(const RegFileState& s, std::uint32_t offset, bool is_read,
                           std::uint32_t value = 0);

// Descriptor assembled from the current register contents. Dimension 3 is
// included when its repetitions exceed one, which also pulls in dimension 2;
// otherwise dimension 2 is included when its repetitions exceed one.
NdTransferDescriptor assemble_descriptor(const RegFileState& s);

// Records completion of transfer `id`. Completion IDs never move backwards.
RegFileState reg_complete(const RegFileState& s, std::uint64_t id);

inline constexpr std::uint64_t kDescEnd = ~std::uint64_t{0};
inline constexpr std::uint64_t kDescBytes = 40;
inline constexpr std::uint64_t kMaxChain = std::uint64_t{1} << 16;

struct Descriptor64 {
  std::uint64_t next_ptr = kDescEnd;
  std::uint64_t backend_config = 0;
  std::uint64_t length = 0;
  std::uint64_t src_addr = 0;
  std::uint64_t dst_addr = 0;

  bool operator==(const Descriptor64&) const = default;
};

std::array<std::uint8_t, kDescBytes> encode_descriptor(const Descriptor64& d);
Descriptor64 decode_descriptor(std::span<const std::uint8_t> bytes);

void store_descriptor(MemoryStore& mem, Addr ptr, const Descriptor64& d);

// Misaligned / Unmapped.
Descriptor64 fetch_descriptor(const MemoryStore& mem, Addr ptr);

// Descriptors from `head` in chain order. ChainTooLong past `max_chain`.
std::vector<Descriptor64> walk_chain(const MemoryStore& mem, Addr head,
                                     std::uint64_t max_chain = kMaxChain);

TransferDescriptor1D to_transfer(const Descriptor64& d, const BackendOptions& defaults = {});

// One launch per descriptor, in chain order.
std::vector<TransferDescriptor1D> run_chain(const MemoryStore& mem, Addr head,
                                            std::uint64_t max_chain = kMaxChain);

// Writes `transfers` as a chain starting at `base`; returns the head pointer
// (kDescEnd for an empty list).
Addr build_chain(MemoryStore& mem, Addr base, const std::vector<Descriptor64>& chain);

}  // namespace idma
