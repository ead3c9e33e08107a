// SPDX-License-Identifier: Apache-2.0
//
// A whole engine instance: front-end, mid-end chain, one or more back-ends,
// and the memory endpoints behind them, driven by a single cycle loop.
//
// Items move between stages through two-entry queues. Every item carries the
// cycle from which the next stage may take it, so a stage that adds one
// cycle of latency stamps its outputs with now + 1 and a zero-latency stage
// with now.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "idma/core.hpp"
#include "idma/engine.hpp"
#include "idma/frontend.hpp"
#include "idma/memsys.hpp"
#include "idma/metrics.hpp"
#include "idma/midend.hpp"

namespace idma {

struct MemoryPortConfig {
  std::string port;  // protocol name, or "desc" for the descriptor fetch port
  std::optional<std::string> preset;
  EndpointModel model;  // width is overridden with the engine data width

  bool operator==(const MemoryPortConfig&) const = default;
};

enum class FrontendType : std::uint8_t { Direct, Reg32_3d, Desc64 };

std::string_view frontend_name(FrontendType t);

struct FrontendConfig {
  FrontendType type = FrontendType::Direct;
  Cycle launch_cycles = 3;     // direct: cycles per launch
  Addr desc_base = 0;          // desc_64: where the chain is placed
  std::uint64_t max_chain = kMaxChain;
  std::size_t prefetch = 4;    // desc_64: fetched descriptors held before launch

  bool operator==(const FrontendConfig&) const = default;
};

enum class FillKind : std::uint8_t { Random, Zero, Increment };

struct TransferSpec {
  NdTransferDescriptor desc;
  Cycle at = 0;  // earliest launch cycle

  bool operator==(const TransferSpec&) const = default;
};

struct FragmentedCopy {
  Addr src = 0;
  Addr dst = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t piece_bytes = 0;
  ProtocolId src_protocol = ProtocolId::Axi;
  ProtocolId dst_protocol = ProtocolId::Axi;
  bool as_nd = true;  // one ND launch instead of one launch per piece
  BackendOptions options;

  bool operator==(const FragmentedCopy&) const = default;
};

struct WorkloadConfig {
  FillKind fill = FillKind::Random;
  std::vector<TransferSpec> transfers;
  std::optional<FragmentedCopy> fragmented;

  bool operator==(const WorkloadConfig&) const = default;
};

struct SimSettings {
  std::uint64_t seed = 1;
  Cycle error_decision_cycles = 1;
  std::optional<Cycle> max_cycles;

  bool operator==(const SimSettings&) const = default;
};

struct SystemConfig {
  std::string id = "custom";
  EngineConfig engine;
  std::vector<MemoryPortConfig> memory;
  FrontendConfig frontend;
  std::vector<MidendSpec> midends;
  WorkloadConfig workload;
  SimSettings sim;

  // Number of back-ends implied by the mid-end chain.
  std::size_t backends() const;
  const MemoryPortConfig* memory_for(std::string_view port) const;
  // Preset of the first data memory, or "custom".
  std::string mem_preset() const;

  bool operator==(const SystemConfig&) const = default;
};

// Launches the workload describes, in order.
std::vector<TransferSpec> workload_transfers(const SystemConfig& cfg);

// Structural checks beyond validate_config (mid-end order, memories, ...).
void check_system(const SystemConfig& cfg);

struct SimHooks {
  ErrorPolicy policy;
  StreamTransform transform;
  bool trace = false;
};

struct SimResult {
  SimReport report;
  std::map<std::string, std::shared_ptr<MemoryStore>> memories;
  // Source bytes as filled before the run, per transfer launch order.
  std::vector<std::vector<std::uint8_t>> sources;
};

SimResult simulate(const SystemConfig& cfg, const SimHooks& hooks = {});

// Overrides one sweepable parameter: nax, nax_read, nax_write, dw, aw,
// buffer_depth, piece_bytes, total_bytes, latency, max_outstanding, preset.
void apply_param(SystemConfig& cfg, std::string_view name, std::string_view value);

SweepRow sweep_row(const SystemConfig& cfg, const SimReport& r);

}  // namespace idma
