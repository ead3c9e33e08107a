// SPDX-License-Identifier: Apache-2.0
#include "idma/core.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <set>

namespace idma {

std::string_view protocol_name(ProtocolId p) {
  switch (p) {
    case ProtocolId::Axi: return "axi";
    case ProtocolId::AxiLite: return "axi_lite";
    case ProtocolId::AxiStream: return "axi_stream";
    case ProtocolId::Obi: return "obi";
    case ProtocolId::TileLinkUL: return "tilelink_ul";
    case ProtocolId::TileLinkUH: return "tilelink_uh";
    case ProtocolId::Init: return "init";
  }
  return "?";
}

std::optional<ProtocolId> parse_protocol(std::string_view name) {
  for (auto p : kAllProtocols) {
    if (protocol_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view side_name(Side s) { return s == Side::Read ? "read" : "write"; }

std::string_view direction_name(PortDirection d) {
  switch (d) {
    case PortDirection::Read: return "read";
    case PortDirection::Write: return "write";
    case PortDirection::ReadWrite: return "rw";
  }
  return "?";
}

std::optional<PortDirection> parse_direction(std::string_view name) {
  if (name == "read") return PortDirection::Read;
  if (name == "write") return PortDirection::Write;
  if (name == "rw" || name == "read-write") return PortDirection::ReadWrite;
  return std::nullopt;
}

std::string_view error_action_name(ErrorAction a) {
  switch (a) {
    case ErrorAction::Continue: return "continue";
    case ErrorAction::Abort: return "abort";
    case ErrorAction::Replay: return "replay";
  }
  return "?";
}

std::optional<ErrorAction> parse_error_action(std::string_view name) {
  if (name == "continue") return ErrorAction::Continue;
  if (name == "abort") return ErrorAction::Abort;
  if (name == "replay") return ErrorAction::Replay;
  return std::nullopt;
}

std::uint64_t NdTransferDescriptor::count() const {
  std::uint64_t n = 1;
  for (const auto& d : dims) n *= d.reps;
  return n;
}

std::uint64_t NdTransferDescriptor::total_bytes() const { return base.length * count(); }

bool supports(const EngineConfig& cfg, ProtocolId p, Side side) {
  return std::any_of(cfg.ports.begin(), cfg.ports.end(), [&](const PortSpec& port) {
    if (port.protocol != p) return false;
    if (port.direction == PortDirection::ReadWrite) return true;
    return (side == Side::Read) == (port.direction == PortDirection::Read);
  });
}

ConfigCheck validate_config(const EngineConfig& cfg) {
  ConfigCheck out;
  auto add = [&](Errc code, std::string field, std::string msg) {
    out.violations.push_back({code, std::move(field), std::move(msg)});
  };

  if (cfg.aw < 16 || cfg.aw > 64) {
    add(Errc::InvalidWidth, "aw", "address width must lie in [16, 64], got " + std::to_string(cfg.aw));
  }
  if (cfg.dw < 8 || cfg.dw > 1024 || !std::has_single_bit(cfg.dw)) {
    add(Errc::InvalidWidth, "dw",
        "data width must be a power of two in [8, 1024], got " + std::to_string(cfg.dw));
  }
  if (cfg.nax_read == 0) add(Errc::ZeroCapacity, "nax_read", "needs at least one outstanding read");
  if (cfg.nax_write == 0) add(Errc::ZeroCapacity, "nax_write", "needs at least one outstanding write");
  if (cfg.buffer_depth == 0) add(Errc::ZeroCapacity, "buffer_depth", "dataflow element needs an entry");

  std::set<std::pair<ProtocolId, bool>> seen;  // (protocol, is_read)
  for (std::size_t i = 0; i < cfg.ports.size(); ++i) {
    const auto& port = cfg.ports[i];
    const auto field = "ports[" + std::to_string(i) + "]";
    if (port.protocol == ProtocolId::Init && port.direction != PortDirection::Read) {
      add(Errc::UnsupportedDirection, field, "init is a read-only pseudo protocol");
    }
    const bool reads = port.direction != PortDirection::Write;
    const bool writes = port.direction != PortDirection::Read;
    if ((reads && !seen.insert({port.protocol, true}).second) ||
        (writes && !seen.insert({port.protocol, false}).second)) {
      add(Errc::DuplicatePort, field,
          "second " + std::string(protocol_name(port.protocol)) + " port in the same direction");
    }
  }
  if (std::none_of(cfg.ports.begin(), cfg.ports.end(),
                   [](const PortSpec& p) { return p.direction != PortDirection::Write; })) {
    add(Errc::NoReadPort, "ports", "at least one read-capable port is required");
  }
  if (std::none_of(cfg.ports.begin(), cfg.ports.end(), [](const PortSpec& p) {
        return p.direction != PortDirection::Read && p.protocol != ProtocolId::Init;
      })) {
    add(Errc::NoWritePort, "ports", "at least one write-capable port is required");
  }

  if (out.violations.empty()) out.config = ValidatedConfig(cfg);
  return out;
}

ValidatedConfig require_valid(const EngineConfig& cfg) {
  auto check = validate_config(cfg);
  if (!check.ok()) {
    const auto& v = check.violations.front();
    fail(v.code, v.field + ": " + v.message);
  }
  return *check.config;
}

std::uint64_t address_limit(unsigned aw) {
  return aw >= 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << aw);
}

void check_descriptor(const TransferDescriptor1D& d, const EngineConfig& cfg) {
  const auto limit = address_limit(cfg.aw);
  auto in_range = [&](Addr a) { return a < limit && d.length <= limit - a; };
  if (!in_range(d.src_addr) || !in_range(d.dst_addr)) {
    fail(Errc::AddressOutOfRange, "transfer exceeds the " + std::to_string(cfg.aw) + "-bit address space");
  }
  if (d.options.user_burst_cap && *d.options.user_burst_cap < cfg.bus_bytes()) {
    fail(Errc::InvalidOption, "user burst cap below the bus width");
  }
  for (auto n : {d.options.src_reduce_len, d.options.dst_reduce_len}) {
    if (n && *n > 32) fail(Errc::InvalidOption, "reduce_len exponent above 32");
  }
  if (!supports(cfg, d.src_protocol, Side::Read)) {
    fail(Errc::ConfigError, "no read port for " + std::string(protocol_name(d.src_protocol)));
  }
  if (!supports(cfg, d.dst_protocol, Side::Write)) {
    fail(Errc::ConfigError, "no write port for " + std::string(protocol_name(d.dst_protocol)));
  }
}

}  // namespace idma
