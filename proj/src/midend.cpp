// SPDX-License-Identifier: Apache-2.0
#include "idma/midend.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace idma {

namespace {

__extension__ typedef __int128 Wide;

Addr side_addr(const TransferDescriptor1D& d, SplitSide side) {
  return side == SplitSide::Src ? d.src_addr : d.dst_addr;
}

void check_boundary(std::uint64_t boundary) {
  if (boundary == 0 || !std::has_single_bit(boundary)) {
    fail(Errc::InvalidArgument, "boundary must be a power of two, got " + std::to_string(boundary));
  }
}

}  // namespace

NdIterator::NdIterator(NdTransferDescriptor d)
    : desc_(std::move(d)), index_(desc_.dims.size(), 0), total_(desc_.count()) {}

TransferDescriptor1D NdIterator::next() {
  if (done()) fail(Errc::InvalidArgument, "ND iterator exhausted");
  TransferDescriptor1D out = desc_.base;
  for (std::size_t k = 0; k < index_.size(); ++k) {
    const auto i = static_cast<std::int64_t>(index_[k]);
    out.src_addr += static_cast<Addr>(i * desc_.dims[k].src_stride);
    out.dst_addr += static_cast<Addr>(i * desc_.dims[k].dst_stride);
  }
  // dims[0] moves fastest
  for (std::size_t k = 0; k < index_.size(); ++k) {
    if (++index_[k] < desc_.dims[k].reps) break;
    index_[k] = 0;
  }
  ++emitted_;
  return out;
}

void check_nd_bounds(const NdTransferDescriptor& d, unsigned aw) {
  for (const auto& dim : d.dims) {
    if (dim.reps == 0) fail(Errc::InvalidArgument, "dimension with zero repetitions");
  }
  const Wide limit = aw >= 64 ? (Wide{1} << 64) : (Wide{1} << aw);
  auto check = [&](Addr base, bool src) {
    Wide lo = base, hi = base;
    for (const auto& dim : d.dims) {
      const Wide span = Wide(src ? dim.src_stride : dim.dst_stride) * Wide(dim.reps - 1);
      if (span < 0) lo += span; else hi += span;
    }
    if (lo < 0 || hi + Wide(d.base.length) > limit) {
      fail(Errc::AddressOutOfRange, std::string(src ? "source" : "destination") +
                                        " range leaves the " + std::to_string(aw) +
                                        "-bit address space");
    }
  };
  check(d.base.src_addr, true);
  check(d.base.dst_addr, false);
}

std::vector<TransferDescriptor1D> expand_nd(const NdTransferDescriptor& d, unsigned aw) {
  check_nd_bounds(d, aw);
  std::vector<TransferDescriptor1D> out;
  out.reserve(d.count());
  NdIterator it(d);
  while (!it.done()) out.push_back(it.next());
  return out;
}

NdTransferDescriptor to_nd(const Transfer2D& t) {
  if (t.length_1d == 0) fail(Errc::InvalidArgument, "1D length must be nonzero");
  if (t.total_length % t.length_1d != 0) {
    fail(Errc::IndivisibleTotal, "total " + std::to_string(t.total_length) +
                                     " is not a multiple of " + std::to_string(t.length_1d));
  }
  NdTransferDescriptor nd;
  nd.base = {t.src_addr, t.dst_addr, t.length_1d, t.src_protocol, t.dst_protocol, t.options};
  nd.dims.push_back({t.src_stride, t.dst_stride, t.total_length / t.length_1d});
  return nd;
}

std::vector<TransferDescriptor1D> expand_2d(const Transfer2D& t, unsigned aw) {
  return expand_nd(to_nd(t), aw);
}

std::vector<TransferDescriptor1D> split_at_boundary(const TransferDescriptor1D& d,
                                                    std::uint64_t boundary, SplitSide side) {
  check_boundary(boundary);
  if (d.length == 0) return {d};
  std::vector<TransferDescriptor1D> out;
  std::uint64_t done = 0;
  while (done < d.length) {
    const Addr a = side_addr(d, side) + done;
    const auto len = std::min(d.length - done, boundary - a % boundary);
    auto piece = d;
    piece.src_addr = d.src_addr + done;
    piece.dst_addr = d.dst_addr + done;
    piece.length = len;
    out.push_back(piece);
    done += len;
  }
  return out;
}

std::size_t dist_port(Addr addr, std::uint64_t boundary, std::size_t n_ports) {
  return static_cast<std::size_t>((addr / boundary) % n_ports);
}

std::vector<std::vector<TransferDescriptor1D>> distribute(
    std::span<const TransferDescriptor1D> pieces, std::size_t n_ports, std::uint64_t boundary,
    SplitSide side, DistPolicy policy) {
  check_boundary(boundary);
  if (n_ports == 0) fail(Errc::InvalidArgument, "distribution needs at least one port");
  std::vector<std::vector<TransferDescriptor1D>> out(n_ports);
  std::size_t rr = 0;
  for (const auto& p : pieces) {
    const Addr a = side_addr(p, side);
    if (p.length > 0 && a / boundary != (a + p.length - 1) / boundary) {
      fail(Errc::UnsplitPiece, "piece crosses a boundary line; split it first");
    }
    const auto port = policy == DistPolicy::RoundRobin ? rr++ % n_ports
                                                       : dist_port(a, boundary, n_ports);
    out[port].push_back(p);
  }
  return out;
}

std::vector<std::vector<TransferDescriptor1D>> distribute_tree(
    std::span<const TransferDescriptor1D> pieces, unsigned levels, std::uint64_t boundary,
    SplitSide side) {
  if (levels == 0) {
    return distribute(pieces, 1, boundary, side);
  }
  // Root decides the lowest index bit; each subtree looks at coarser lines.
  auto halves = distribute(pieces, 2, boundary, side);
  std::vector<std::vector<TransferDescriptor1D>> out(std::size_t{1} << levels);
  for (std::size_t bit = 0; bit < 2; ++bit) {
    auto sub = distribute_tree(halves[bit], levels - 1, boundary * 2, side);
    for (std::size_t j = 0; j < sub.size(); ++j) out[bit + 2 * j] = std::move(sub[j]);
  }
  return out;
}

RtArbiter::RtArbiter(RtConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.period == 0) fail(Errc::InvalidArgument, "rt period must be at least one cycle");
}

void RtArbiter::submit_bypass(BypassRequest req) { bypass_.push_back(std::move(req)); }

bool RtArbiter::periodic_remaining() const {
  return cfg_.enabled && (!cfg_.num_launches || next_launch_ < *cfg_.num_launches);
}

bool RtArbiter::periodic_due(Cycle now) const {
  return periodic_remaining() && now >= cfg_.start + next_launch_ * cfg_.period;
}

std::optional<RtEvent> RtArbiter::tick(Cycle now) {
  if (!active_) {
    if (periodic_due(now)) {
      active_ = Active{true, next_launch_++, NdIterator(cfg_.shape)};
    } else if (!bypass_.empty() && bypass_.front().arrival <= now) {
      auto req = std::move(bypass_.front());
      bypass_.pop_front();
      active_ = Active{false, req.tag, NdIterator(std::move(req.desc))};
    } else {
      return std::nullopt;
    }
    if (active_->it.done()) {  // empty shape
      active_.reset();
      return std::nullopt;
    }
  }
  RtEvent ev;
  ev.cycle = now;
  ev.periodic = active_->periodic;
  ev.index = active_->index;
  ev.first = active_->it.emitted() == 0;
  ev.desc = active_->it.next();
  ev.last = active_->it.done();
  if (ev.last) active_.reset();
  return ev;
}

bool RtArbiter::finished() const { return !active_ && bypass_.empty() && !periodic_remaining(); }

std::optional<Cycle> RtArbiter::next_ready(Cycle now) const {
  if (active_) return now;
  std::optional<Cycle> t;
  if (periodic_remaining()) t = std::max(now, cfg_.start + next_launch_ * cfg_.period);
  if (!bypass_.empty()) {
    const auto b = std::max(now, bypass_.front().arrival);
    t = t ? std::min(*t, b) : b;
  }
  return t;
}

std::vector<RtEvent> rt_schedule(const RtConfig& cfg, std::span<const BypassRequest> bypass,
                                 Cycle horizon) {
  RtArbiter arb(cfg);
  std::vector<BypassRequest> sorted(bypass.begin(), bypass.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.arrival < b.arrival; });
  for (auto& r : sorted) arb.submit_bypass(std::move(r));
  std::vector<RtEvent> out;
  Cycle now = 0;
  while (now < horizon && !arb.finished()) {
    const auto ready = arb.next_ready(now);
    if (!ready || *ready >= horizon) break;
    now = *ready;
    if (auto ev = arb.tick(now)) out.push_back(*ev);
    ++now;
  }
  return out;
}

std::string_view midend_name(const MidendSpec& m) {
  struct Visitor {
    std::string_view operator()(const TensorNdSpec&) const { return "tensor_nd"; }
    std::string_view operator()(const Tensor2dSpec&) const { return "tensor_2d"; }
    std::string_view operator()(const MpSplitSpec&) const { return "mp_split"; }
    std::string_view operator()(const MpDistSpec&) const { return "mp_dist"; }
    std::string_view operator()(const Rt3dSpec&) const { return "rt_3d"; }
  };
  return std::visit(Visitor{}, m);
}

Cycle midend_latency(const MidendSpec& m) {
  if (const auto* nd = std::get_if<TensorNdSpec>(&m)) return nd->zero_latency ? 0 : 1;
  return 1;
}

}  // namespace idma
