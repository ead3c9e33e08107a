// SPDX-License-Identifier: Apache-2.0
//
// Domain types shared by every stage of the engine: transfer descriptors as
// they travel from front-end through mid-ends to the back-end, legalized
// bursts, and the back-end configuration.
//
// Addresses and lengths are always 64-bit unsigned; the configured address
// width only bounds which values are legal.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idma/error.hpp"

namespace idma {

using Addr = std::uint64_t;
using Cycle = std::uint64_t;

enum class ProtocolId : std::uint8_t {
  Axi = 0,
  AxiLite = 1,
  AxiStream = 2,
  Obi = 3,
  TileLinkUL = 4,
  TileLinkUH = 5,
  Init = 6,
};

inline constexpr ProtocolId kAllProtocols[] = {
    ProtocolId::Axi,        ProtocolId::AxiLite,    ProtocolId::AxiStream, ProtocolId::Obi,
    ProtocolId::TileLinkUL, ProtocolId::TileLinkUH, ProtocolId::Init,
};

std::string_view protocol_name(ProtocolId p);
std::optional<ProtocolId> parse_protocol(std::string_view name);

enum class Side : std::uint8_t { Read, Write };
enum class PortDirection : std::uint8_t { Read, Write, ReadWrite };
enum class ErrorAction : std::uint8_t { Continue, Abort, Replay };

std::string_view side_name(Side s);
std::string_view direction_name(PortDirection d);
std::optional<PortDirection> parse_direction(std::string_view name);
std::string_view error_action_name(ErrorAction a);
std::optional<ErrorAction> parse_error_action(std::string_view name);

// Data produced by the Init read manager.
struct InitPattern {
  enum class Kind : std::uint8_t { Constant, Increment, Pseudorandom };
  Kind kind = Kind::Constant;
  // constant byte, increment start byte, or pseudorandom seed
  std::uint64_t value = 0;

  bool operator==(const InitPattern&) const = default;
};

// Run-time back-end options carried with every 1D descriptor. Only the
// burst cap and error action come from the published descriptor format; the
// remaining fields are simulator extensions.
struct BackendOptions {
  bool decouple_rw = true;
  std::optional<std::uint64_t> user_burst_cap;  // bytes, nullopt = unlimited
  std::optional<unsigned> src_reduce_len;       // burst cap of 2^n beats on the read side
  std::optional<unsigned> dst_reduce_len;       // burst cap of 2^n beats on the write side
  ErrorAction error_action_default = ErrorAction::Continue;
  InitPattern init;

  bool operator==(const BackendOptions&) const = default;
};

struct TransferDescriptor1D {
  Addr src_addr = 0;
  Addr dst_addr = 0;
  std::uint64_t length = 0;
  ProtocolId src_protocol = ProtocolId::Axi;
  ProtocolId dst_protocol = ProtocolId::Axi;
  BackendOptions options;

  bool operator==(const TransferDescriptor1D&) const = default;
};

struct Dimension {
  std::int64_t src_stride = 0;
  std::int64_t dst_stride = 0;
  std::uint64_t reps = 1;

  bool operator==(const Dimension&) const = default;
};

// base.length is the innermost (contiguous) length; dims run outward, the
// last entry being the slowest-moving dimension.
struct NdTransferDescriptor {
  TransferDescriptor1D base;
  std::vector<Dimension> dims;

  std::uint64_t count() const;
  std::uint64_t total_bytes() const;

  bool operator==(const NdTransferDescriptor&) const = default;
};

struct LegalBurst {
  Addr addr = 0;
  std::uint64_t length = 0;
  Side side = Side::Read;
  ProtocolId protocol = ProtocolId::Axi;
  std::uint64_t seq = 0;

  bool operator==(const LegalBurst&) const = default;
};

struct PortSpec {
  ProtocolId protocol = ProtocolId::Axi;
  PortDirection direction = PortDirection::ReadWrite;

  bool operator==(const PortSpec&) const = default;
};

struct EngineConfig {
  unsigned aw = 32;
  unsigned dw = 32;
  unsigned nax_read = 2;
  unsigned nax_write = 2;
  std::vector<PortSpec> ports;
  bool has_legalizer = true;
  bool has_error_handler = true;
  unsigned buffer_depth = 2;
  bool reject_zero_length = false;

  std::uint64_t bus_bytes() const { return dw / 8; }
  bool operator==(const EngineConfig&) const = default;
};

bool supports(const EngineConfig& cfg, ProtocolId p, Side side);

struct Violation {
  Errc code;
  std::string field;
  std::string message;
};

// An EngineConfig that has passed validate_config. Only validate_config can
// produce one.
class ValidatedConfig {
 public:
  const EngineConfig& get() const { return cfg_; }
  const EngineConfig* operator->() const { return &cfg_; }
  operator const EngineConfig&() const { return cfg_; }  // NOLINT(google-explicit-constructor)

  bool operator==(const ValidatedConfig&) const = default;

 private:
  explicit ValidatedConfig(EngineConfig cfg) : cfg_(std::move(cfg)) {}
  friend struct ConfigCheck validate_config(const EngineConfig& cfg);

  EngineConfig cfg_;
};

struct ConfigCheck {
  std::optional<ValidatedConfig> config;
  std::vector<Violation> violations;

  bool ok() const { return config.has_value(); }
};

// Total: never throws, reports every violated invariant.
ConfigCheck validate_config(const EngineConfig& cfg);

// Throws Error carrying the first violation.
ValidatedConfig require_valid(const EngineConfig& cfg);

// Address-range and option checks for a descriptor against an engine.
void check_descriptor(const TransferDescriptor1D& d, const EngineConfig& cfg);

// 2^aw, saturating at 2^64 - 1 for aw = 64.
std::uint64_t address_limit(unsigned aw);

}  // namespace idma
