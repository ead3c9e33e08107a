// SPDX-License-Identifier: Apache-2.0
//
// On-chip protocol properties and the maximum-legal-burst rule shared by the
// transfer legalizer and the simulated protocol managers.
#pragma once

#include <cstdint>
#include <optional>

#include "idma/core.hpp"

namespace idma {

struct Capabilities {
  bool supports_bursts = false;
  std::optional<std::uint64_t> max_burst_beats;  // nullopt = unlimited
  std::optional<std::uint64_t> max_burst_bytes;
  std::optional<std::uint64_t> page_bytes;  // bursts may not cross these lines
  bool pow2_only = false;                   // size is 2^n and naturally aligned
  bool read_capable = true;
  bool write_capable = true;
  bool address_free = false;  // stream-like: addresses carry no meaning

  bool operator==(const Capabilities&) const = default;
};

Capabilities capabilities(ProtocolId p);

// Number of bus beats a burst occupies.
std::uint64_t burst_beats(ProtocolId p, Addr addr, std::uint64_t length, std::uint64_t bus_bytes);

// Largest L with 1 <= L <= remaining for which a burst (addr, L) respects
// every constraint of `p`. Requires remaining >= 1.
std::uint64_t max_legal_burst(ProtocolId p, Addr addr, std::uint64_t remaining, unsigned dw,
                              std::optional<std::uint64_t> user_cap = std::nullopt);

// Independent legality check used by managers that receive unlegalized
// transfers and by the property tests.
bool is_legal_burst(ProtocolId p, Addr addr, std::uint64_t length, unsigned dw,
                    std::optional<std::uint64_t> user_cap = std::nullopt);

}  // namespace idma
