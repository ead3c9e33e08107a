// SPDX-License-Identifier: Apache-2.0
#include "idma/protocol.hpp"

#include <algorithm>
#include <bit>

namespace idma {

Capabilities capabilities(ProtocolId p) {
  Capabilities c;
  switch (p) {
    case ProtocolId::Axi:
      c.supports_bursts = true;
      c.max_burst_beats = 256;
      c.max_burst_bytes = 4096;
      c.page_bytes = 4096;
      break;
    case ProtocolId::AxiLite:
    case ProtocolId::Obi:
    case ProtocolId::TileLinkUL:
      c.supports_bursts = false;
      break;
    case ProtocolId::AxiStream:
      c.supports_bursts = true;
      c.address_free = true;
      break;
    case ProtocolId::TileLinkUH:
      c.supports_bursts = true;
      c.pow2_only = true;
      break;
    case ProtocolId::Init:
      c.supports_bursts = true;
      c.address_free = true;
      c.write_capable = false;
      break;
  }
  return c;
}

std::uint64_t burst_beats(ProtocolId p, Addr addr, std::uint64_t length, std::uint64_t bus_bytes) {
  if (length == 0) return 0;
  if (capabilities(p).address_free) return (length + bus_bytes - 1) / bus_bytes;
  return (addr % bus_bytes + length + bus_bytes - 1) / bus_bytes;
}

std::uint64_t max_legal_burst(ProtocolId p, Addr addr, std::uint64_t remaining, unsigned dw,
                              std::optional<std::uint64_t> user_cap) {
  const auto caps = capabilities(p);
  const std::uint64_t bw = dw / 8;
  std::uint64_t bound = remaining;
  if (user_cap) bound = std::min(bound, std::max<std::uint64_t>(*user_cap, 1));
  if (caps.address_free) return std::max<std::uint64_t>(bound, 1);

  if (!caps.supports_bursts) {
    bound = std::min(bound, bw - addr % bw);
  } else {
    if (caps.page_bytes) bound = std::min(bound, *caps.page_bytes - addr % *caps.page_bytes);
    if (caps.max_burst_bytes) bound = std::min(bound, *caps.max_burst_bytes);
    if (caps.max_burst_beats) bound = std::min(bound, *caps.max_burst_beats * bw - addr % bw);
  }
  if (caps.pow2_only) {
    bound = std::bit_floor(bound);
    if (addr != 0) bound = std::min(bound, addr & (~addr + 1));
  }
  return std::max<std::uint64_t>(bound, 1);
}

bool is_legal_burst(ProtocolId p, Addr addr, std::uint64_t length, unsigned dw,
                    std::optional<std::uint64_t> user_cap) {
  const auto caps = capabilities(p);
  const std::uint64_t bw = dw / 8;
  if (length == 0) return false;
  if (user_cap && length > *user_cap && length > 1) return false;
  if (caps.address_free) return true;

  if (!caps.supports_bursts) {
    if (addr / bw != (addr + length - 1) / bw) return false;
  } else {
    if (caps.page_bytes && addr / *caps.page_bytes != (addr + length - 1) / *caps.page_bytes) {
      return false;
    }
    if (caps.max_burst_bytes && length > *caps.max_burst_bytes) return false;
    if (caps.max_burst_beats && burst_beats(p, addr, length, bw) > *caps.max_burst_beats) {
      return false;
    }
  }
  if (caps.pow2_only && (!std::has_single_bit(length) || addr % length != 0)) return false;
  return true;
}

}  // namespace idma
