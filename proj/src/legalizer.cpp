// SPDX-License-Identifier: Apache-2.0
#include "idma/legalizer.hpp"

#include <algorithm>

#include "idma/protocol.hpp"

namespace idma {

BurstIterator::BurstIterator(Addr addr, std::uint64_t length, ProtocolId protocol, unsigned dw,
                             std::optional<std::uint64_t> user_cap, Side side)
    : addr_(addr), remaining_(length), protocol_(protocol), dw_(dw), cap_(user_cap), side_(side) {}

std::uint64_t BurstIterator::next_length() const {
  return max_legal_burst(protocol_, addr_, remaining_, dw_, cap_);
}

std::uint64_t BurstIterator::clamped_length(std::uint64_t clamp) const {
  return max_legal_burst(protocol_, addr_, std::min(remaining_, std::max<std::uint64_t>(clamp, 1)),
                         dw_, cap_);
}

LegalBurst BurstIterator::next() { return next(remaining_); }

LegalBurst BurstIterator::next(std::uint64_t clamp) {
  const auto bound = std::min(remaining_, std::max<std::uint64_t>(clamp, 1));
  const auto len = max_legal_burst(protocol_, addr_, bound, dw_, cap_);
  LegalBurst b{addr_, len, side_, protocol_, seq_++};
  addr_ += len;
  remaining_ -= len;
  return b;
}

std::vector<LegalBurst> legalize_side(Addr addr, std::uint64_t length, ProtocolId protocol,
                                      unsigned dw, std::optional<std::uint64_t> user_cap,
                                      Side side) {
  std::vector<LegalBurst> out;
  BurstIterator it(addr, length, protocol, dw, user_cap, side);
  while (!it.done()) out.push_back(it.next());
  return out;
}

std::optional<std::uint64_t> side_cap(const BackendOptions& options, Side side, unsigned dw) {
  auto cap = options.user_burst_cap;
  const auto reduce = side == Side::Read ? options.src_reduce_len : options.dst_reduce_len;
  if (reduce) {
    const std::uint64_t beats_cap = (std::uint64_t{1} << *reduce) * (dw / 8);
    cap = cap ? std::min(*cap, beats_cap) : beats_cap;
  }
  return cap;
}

LegalizedTransfer legalize(const TransferDescriptor1D& d, const EngineConfig& cfg) {
  LegalizedTransfer out;
  out.parent = d;
  if (d.length == 0) {
    if (cfg.reject_zero_length) fail(Errc::ZeroLengthRejected, "zero-length transfer");
    return out;
  }
  TransferLegalizer legalizer(d, cfg.dw, true);
  while (!legalizer.done(Side::Read)) out.read_bursts.push_back(legalizer.pop(Side::Read));
  while (!legalizer.done(Side::Write)) out.write_bursts.push_back(legalizer.pop(Side::Write));
  return out;
}

TransferLegalizer::TransferLegalizer(const TransferDescriptor1D& d, unsigned dw, bool hardware)
    : coupled_(!d.options.decouple_rw),
      passthrough_(!hardware),
      src_(d.src_addr, d.length, d.src_protocol, dw, side_cap(d.options, Side::Read, dw), Side::Read),
      dst_(d.dst_addr, d.length, d.dst_protocol, dw, side_cap(d.options, Side::Write, dw),
           Side::Write) {
  if (passthrough_ && d.length > 0) {
    reads_.push_back({d.src_addr, d.length, Side::Read, d.src_protocol, 0});
    writes_.push_back({d.dst_addr, d.length, Side::Write, d.dst_protocol, 0});
  }
}

bool TransferLegalizer::done(Side side) const {
  if (passthrough_) return queue(side).empty();
  const auto& it = side == Side::Read ? src_ : dst_;
  return queue(side).empty() && it.done();
}

void TransferLegalizer::refill(Side side) {
  if (passthrough_) return;
  if (!coupled_) {
    auto& it = side == Side::Read ? src_ : dst_;
    if (!it.done()) queue(side).push_back(it.next());
    return;
  }
  if (src_.done()) return;
  // Shrink until both sides accept the same length; each step is legal for
  // the side that produced it, so this terminates at length 1 at worst.
  auto len = std::min(src_.next_length(), dst_.next_length());
  for (;;) {
    const auto common = std::min(src_.clamped_length(len), dst_.clamped_length(len));
    if (common == len) break;
    len = common;
  }
  reads_.push_back(src_.next(len));
  writes_.push_back(dst_.next(len));
}

const LegalBurst& TransferLegalizer::peek(Side side) {
  if (queue(side).empty()) refill(side);
  if (queue(side).empty()) fail(Errc::InvalidArgument, "no bursts left on this side");
  return queue(side).front();
}

LegalBurst TransferLegalizer::pop(Side side) {
  auto b = peek(side);
  queue(side).pop_front();
  return b;
}

}  // namespace idma
