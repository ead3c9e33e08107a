// SPDX-License-Identifier: Apache-2.0
//
// Mid-ends: stream transformers between the front-end and the back-end.
//
//   tensor_2D / tensor_ND  expand affine multi-dimensional transfers
//   mp_split               cut transfers at power-of-two address boundaries
//   mp_dist                route pieces to parallel back-ends by address
//   rt_3D                  launch a 3D transfer periodically, with a bypass
//                          path for unrelated transfers
#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "idma/core.hpp"

namespace idma {

// Walks an ND descriptor in nested-loop order, outermost dimension slowest.
class NdIterator {
 public:
  explicit NdIterator(NdTransferDescriptor d);

  bool done() const { return emitted_ == total_; }
  std::uint64_t count() const { return total_; }
  std::uint64_t emitted() const { return emitted_; }
  TransferDescriptor1D next();

 private:
  NdTransferDescriptor desc_;
  std::vector<std::uint64_t> index_;
  std::uint64_t total_;
  std::uint64_t emitted_ = 0;
};

// AddressOutOfRange when any generated range leaves [0, 2^aw).
void check_nd_bounds(const NdTransferDescriptor& d, unsigned aw);

std::vector<TransferDescriptor1D> expand_nd(const NdTransferDescriptor& d, unsigned aw = 64);

// The embedded-style 2D programming interface.
struct Transfer2D {
  Addr src_addr = 0;
  Addr dst_addr = 0;
  std::uint64_t total_length = 0;
  std::uint64_t length_1d = 0;
  std::int64_t src_stride = 0;
  std::int64_t dst_stride = 0;
  ProtocolId src_protocol = ProtocolId::Axi;
  ProtocolId dst_protocol = ProtocolId::Axi;
  BackendOptions options;
};

NdTransferDescriptor to_nd(const Transfer2D& t);
std::vector<TransferDescriptor1D> expand_2d(const Transfer2D& t, unsigned aw = 64);

enum class SplitSide : std::uint8_t { Src, Dst };

std::vector<TransferDescriptor1D> split_at_boundary(const TransferDescriptor1D& d,
                                                    std::uint64_t boundary, SplitSide side);

enum class DistPolicy : std::uint8_t { AddressModulo, RoundRobin };

// Port for the piece starting at `addr` under address-modulo distribution.
std::size_t dist_port(Addr addr, std::uint64_t boundary, std::size_t n_ports);

std::vector<std::vector<TransferDescriptor1D>> distribute(
    std::span<const TransferDescriptor1D> pieces, std::size_t n_ports, std::uint64_t boundary,
    SplitSide side, DistPolicy policy = DistPolicy::AddressModulo);

// The same distribution built from 2-way distributors arranged as a binary
// tree of the given depth (2^levels leaves).
std::vector<std::vector<TransferDescriptor1D>> distribute_tree(
    std::span<const TransferDescriptor1D> pieces, unsigned levels, std::uint64_t boundary,
    SplitSide side);

struct RtConfig {
  NdTransferDescriptor shape;
  Cycle period = 1;
  std::optional<std::uint64_t> num_launches;  // nullopt = unbounded
  bool enabled = true;
  Cycle start = 0;

  bool operator==(const RtConfig&) const = default;
};

struct BypassRequest {
  Cycle arrival = 0;
  NdTransferDescriptor desc;
  std::uint64_t tag = 0;
};

struct RtEvent {
  Cycle cycle = 0;
  bool periodic = false;
  std::uint64_t index = 0;  // launch number or bypass tag
  TransferDescriptor1D desc;
  bool first = false;
  bool last = false;
};

// Shares one output port between periodic launches and bypass traffic. One
// 1D descriptor leaves per cycle; an item in progress is never preempted; a
// due periodic launch wins over waiting bypass items.
class RtArbiter {
 public:
  explicit RtArbiter(RtConfig cfg);

  void submit_bypass(BypassRequest req);
  std::optional<RtEvent> tick(Cycle now);

  bool finished() const;
  // Earliest cycle at which tick() can emit again, if any work remains.
  std::optional<Cycle> next_ready(Cycle now) const;
  std::uint64_t launches_started() const { return next_launch_; }

 private:
  struct Active {
    bool periodic;
    std::uint64_t index;
    NdIterator it;
  };

  bool periodic_due(Cycle now) const;
  bool periodic_remaining() const;

  RtConfig cfg_;
  std::uint64_t next_launch_ = 0;
  std::deque<BypassRequest> bypass_;
  std::optional<Active> active_;
};

// Full event schedule up to `horizon` (exclusive).
std::vector<RtEvent> rt_schedule(const RtConfig& cfg, std::span<const BypassRequest> bypass,
                                 Cycle horizon);

struct TensorNdSpec {
  unsigned dims = 3;
  bool zero_latency = false;
  bool operator==(const TensorNdSpec&) const = default;
};
struct Tensor2dSpec {
  bool operator==(const Tensor2dSpec&) const = default;
};
struct MpSplitSpec {
  std::uint64_t boundary = 0x1000;
  SplitSide side = SplitSide::Dst;
  bool operator==(const MpSplitSpec&) const = default;
};
struct MpDistSpec {
  std::size_t ports = 2;
  std::uint64_t boundary = 0x1000;
  SplitSide side = SplitSide::Dst;
  DistPolicy policy = DistPolicy::AddressModulo;
  bool operator==(const MpDistSpec&) const = default;
};
struct Rt3dSpec {
  RtConfig rt;
  bool operator==(const Rt3dSpec&) const = default;
};

using MidendSpec = std::variant<TensorNdSpec, Tensor2dSpec, MpSplitSpec, MpDistSpec, Rt3dSpec>;

std::string_view midend_name(const MidendSpec& m);
// Cycles a descriptor spends in this mid-end before its first output.
Cycle midend_latency(const MidendSpec& m);

}  // namespace idma
