// SPDX-License-Identifier: Apache-2.0
#include "idma/frontend.hpp"

#include <string>

namespace idma {

namespace {

ProtocolId protocol_from_bits(std::uint64_t v) {
  if (v > static_cast<std::uint64_t>(ProtocolId::Init)) {
    fail(Errc::UnknownProtocol, "protocol code " + std::to_string(v) + " is not assigned");
  }
  return static_cast<ProtocolId>(v);
}

std::uint64_t load_le64(std::span<const std::uint8_t> b) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

void store_le64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

std::uint64_t encode_backend_config(const BackendConfigBits& b) {
  return static_cast<std::uint64_t>(b.src_protocol) |
         static_cast<std::uint64_t>(b.dst_protocol) << 3 |
         static_cast<std::uint64_t>(b.error_action) << 6;
}

BackendConfigBits decode_backend_config(std::uint64_t raw) {
  if (raw >> 8) fail(Errc::InvalidOption, "reserved configuration bits set");
  BackendConfigBits b;
  b.src_protocol = protocol_from_bits(raw & 7);
  b.dst_protocol = protocol_from_bits((raw >> 3) & 7);
  const auto action = (raw >> 6) & 3;
  if (action == 3) fail(Errc::InvalidOption, "error action code 3 is reserved");
  b.error_action = static_cast<ErrorAction>(action);
  return b;
}

NdTransferDescriptor assemble_descriptor(const RegFileState& s) {
  const auto cfg = decode_backend_config(s.configuration);
  NdTransferDescriptor d;
  d.base.src_addr = s.src_address;
  d.base.dst_addr = s.dst_address;
  d.base.length = s.transfer_length;
  d.base.src_protocol = cfg.src_protocol;
  d.base.dst_protocol = cfg.dst_protocol;
  d.base.options.error_action_default = cfg.error_action;
  auto dim = [&](std::size_t k) {
    return Dimension{static_cast<std::int32_t>(s.src_stride[k]),
                     static_cast<std::int32_t>(s.dst_stride[k]), s.reps[k]};
  };
  if (s.reps[1] > 1) {
    d.dims = {dim(0), dim(1)};
    if (d.dims[0].reps == 0) d.dims[0].reps = 1;
  } else if (s.reps[0] > 1) {
    d.dims = {dim(0)};
  }
  return d;
}

RegAccessResult reg_access(const RegFileState& s, std::uint32_t offset, bool is_read,
                           std::uint32_t value) {
  RegAccessResult r{s, 0, std::nullopt};
  auto& st = r.state;
  auto field = [&](std::uint32_t off) -> std::uint32_t* {
    switch (off) {
      case reg::kSrc: return &st.src_address;
      case reg::kDst: return &st.dst_address;
      case reg::kLength: return &st.transfer_length;
      case reg::kConfig: return &st.configuration;
      case reg::kDim2SrcStride: return &st.src_stride[0];
      case reg::kDim2DstStride: return &st.dst_stride[0];
      case reg::kDim2Reps: return &st.reps[0];
      case reg::kDim3SrcStride: return &st.src_stride[1];
      case reg::kDim3DstStride: return &st.dst_stride[1];
      case reg::kDim3Reps: return &st.reps[1];
      default: return nullptr;
    }
  };

  if (offset == reg::kStatus || offset == reg::kTransferId) {
    if (!is_read) fail(Errc::UnmappedOffset, "register " + std::to_string(offset) + " is read-only");
    if (offset == reg::kStatus) {
      r.value = static_cast<std::uint32_t>(st.last_completed_id);
    } else {
      r.launch = RegLaunch{st.next_id, assemble_descriptor(st)};
      r.value = static_cast<std::uint32_t>(st.next_id);
      ++st.next_id;
    }
    return r;
  }
  auto* f = field(offset);
  if (!f) fail(Errc::UnmappedOffset, "no register at offset " + std::to_string(offset));
  if (is_read) {
    r.value = *f;
  } else {
    *f = value;
  }
  return r;
}

RegFileState reg_complete(const RegFileState& s, std::uint64_t id) {
  auto out = s;
  if (id >= out.next_id) fail(Errc::InvalidArgument, "completion for an ID never issued");
  if (id > out.last_completed_id) out.last_completed_id = id;
  return out;
}

std::array<std::uint8_t, kDescBytes> encode_descriptor(const Descriptor64& d) {
  std::array<std::uint8_t, kDescBytes> out{};
  store_le64(out.data() + 0, d.next_ptr);
  store_le64(out.data() + 8, d.backend_config);
  store_le64(out.data() + 16, d.length);
  store_le64(out.data() + 24, d.src_addr);
  store_le64(out.data() + 32, d.dst_addr);
  return out;
}

Descriptor64 decode_descriptor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kDescBytes) fail(Errc::InvalidArgument, "descriptor needs 40 bytes");
  return {load_le64(bytes.subspan(0, 8)), load_le64(bytes.subspan(8, 8)),
          load_le64(bytes.subspan(16, 8)), load_le64(bytes.subspan(24, 8)),
          load_le64(bytes.subspan(32, 8))};
}

void store_descriptor(MemoryStore& mem, Addr ptr, const Descriptor64& d) {
  if (ptr % 8 != 0) fail(Errc::Misaligned, "descriptor pointer must be 8-byte aligned");
  const auto bytes = encode_descriptor(d);
  mem.write(ptr, bytes);
}

Descriptor64 fetch_descriptor(const MemoryStore& mem, Addr ptr) {
  if (ptr % 8 != 0) fail(Errc::Misaligned, "descriptor pointer must be 8-byte aligned");
  if (!mem.contains(ptr, kDescBytes)) fail(Errc::Unmapped, "descriptor outside memory");
  std::array<std::uint8_t, kDescBytes> bytes{};
  mem.read(ptr, bytes);
  return decode_descriptor(bytes);
}

std::vector<Descriptor64> walk_chain(const MemoryStore& mem, Addr head, std::uint64_t max_chain) {
  std::vector<Descriptor64> out;
  for (Addr p = head; p != kDescEnd;) {
    if (out.size() >= max_chain) {
      fail(Errc::ChainTooLong, "chain exceeds " + std::to_string(max_chain) + " descriptors");
    }
    out.push_back(fetch_descriptor(mem, p));
    p = out.back().next_ptr;
  }
  return out;
}

TransferDescriptor1D to_transfer(const Descriptor64& d, const BackendOptions& defaults) {
  const auto cfg = decode_backend_config(d.backend_config);
  TransferDescriptor1D t;
  t.src_addr = d.src_addr;
  t.dst_addr = d.dst_addr;
  t.length = d.length;
  t.src_protocol = cfg.src_protocol;
  t.dst_protocol = cfg.dst_protocol;
  t.options = defaults;
  t.options.error_action_default = cfg.error_action;
  return t;
}

std::vector<TransferDescriptor1D> run_chain(const MemoryStore& mem, Addr head,
                                            std::uint64_t max_chain) {
  std::vector<TransferDescriptor1D> out;
  for (const auto& d : walk_chain(mem, head, max_chain)) out.push_back(to_transfer(d));
  return out;
}

Addr build_chain(MemoryStore& mem, Addr base, const std::vector<Descriptor64>& chain) {
  if (chain.empty()) return kDescEnd;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    auto d = chain[i];
    d.next_ptr = i + 1 < chain.size() ? base + (i + 1) * kDescBytes : kDescEnd;
    store_descriptor(mem, base + i * kDescBytes, d);
  }
  return base;
}

}  // namespace idma
