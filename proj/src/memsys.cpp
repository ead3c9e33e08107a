// SPDX-License-Identifier: Apache-2.0
#include "idma/memsys.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "idma/protocol.hpp"

namespace idma {

MemoryStore::MemoryStore(Addr base, std::uint64_t size) : base_(base), size_(size) {}

bool MemoryStore::contains(Addr addr, std::uint64_t len) const {
  if (size_ == 0) return len == 0 || addr + (len - 1) >= addr;
  return addr >= base_ && addr - base_ <= size_ && len <= size_ - (addr - base_);
}

void MemoryStore::check(Addr addr, std::uint64_t len) const {
  if (!contains(addr, len)) {
    fail(Errc::Unmapped, "access [" + std::to_string(addr) + ", +" + std::to_string(len) +
                             ") is outside the memory");
  }
}

const MemoryStore::Page* MemoryStore::find(Addr page) const {
  if (page == last_key_) return last_page_;
  auto it = pages_.find(page);
  if (it == pages_.end()) return nullptr;
  last_key_ = page;
  last_page_ = it->second.get();
  return last_page_;
}

MemoryStore::Page& MemoryStore::touch(Addr page) {
  if (page == last_key_) return *last_page_;
  auto& slot = pages_[page];
  if (!slot) {
    slot = std::make_unique<Page>();
    slot->fill(0);
  }
  last_key_ = page;
  last_page_ = slot.get();
  return *slot;
}

std::uint8_t MemoryStore::read(Addr addr) const {
  check(addr, 1);
  const auto* p = find(addr / kPage);
  return p ? (*p)[addr % kPage] : 0;
}

void MemoryStore::write(Addr addr, std::uint8_t v) {
  check(addr, 1);
  touch(addr / kPage)[addr % kPage] = v;
}

void MemoryStore::read(Addr addr, std::span<std::uint8_t> out) const {
  check(addr, out.size());
  std::size_t done = 0;
  while (done < out.size()) {
    const Addr a = addr + done;
    const auto n = std::min<std::size_t>(out.size() - done, kPage - a % kPage);
    if (const auto* p = find(a / kPage)) {
      std::memcpy(out.data() + done, p->data() + a % kPage, n);
    } else {
      std::memset(out.data() + done, 0, n);
    }
    done += n;
  }
}

void MemoryStore::write(Addr addr, std::span<const std::uint8_t> data) {
  check(addr, data.size());
  std::size_t done = 0;
  while (done < data.size()) {
    const Addr a = addr + done;
    const auto n = std::min<std::size_t>(data.size() - done, kPage - a % kPage);
    std::memcpy(touch(a / kPage).data() + a % kPage, data.data() + done, n);
    done += n;
  }
}

std::vector<std::uint8_t> MemoryStore::read_range(Addr addr, std::uint64_t len) const {
  std::vector<std::uint8_t> out(len);
  read(addr, out);
  return out;
}

bool ErrorRule::matches(Side s, std::uint64_t ordinal, Addr addr, std::uint64_t len) const {
  if (s != side) return false;
  if (burst && *burst != ordinal) return false;
  if (range_begin || range_end) {
    const Addr lo = range_begin.value_or(0);
    const Addr hi = range_end.value_or(~Addr{0});
    if (addr >= hi || addr + len <= lo) return false;
  }
  return burst || range_begin || range_end;
}

EndpointModel preset(std::string_view name) {
  EndpointModel m;
  if (name == "sram") {
    m.latency = 3;
    m.max_outstanding = 8;
  } else if (name == "rpc_dram") {
    m.latency = 13;
    m.max_outstanding = 16;
  } else if (name == "hbm") {
    m.latency = 100;
    m.max_outstanding = 64;
  } else {
    fail(Errc::UnknownPreset, "unknown memory preset '" + std::string(name) + "'");
  }
  return m;
}

Endpoint::Endpoint(EndpointModel model, std::shared_ptr<MemoryStore> store)
    : model_(std::move(model)), store_(std::move(store)), bus_bytes_(model_.width / 8) {
  if (model_.latency == 0) fail(Errc::ZeroCapacity, "endpoint latency must be at least 1");
  if (model_.max_outstanding == 0) fail(Errc::ZeroCapacity, "endpoint needs one outstanding slot");
  if (bus_bytes_ == 0) fail(Errc::InvalidWidth, "endpoint width below 8 bits");
  if (!store_) store_ = std::make_shared<MemoryStore>(model_.base, model_.size);
}

bool Endpoint::faulty(Side s, std::uint64_t ordinal, Addr addr, std::uint64_t len) const {
  return std::any_of(model_.error_plan.begin(), model_.error_plan.end(),
                     [&](const ErrorRule& r) { return r.matches(s, ordinal, addr, len); });
}

void Endpoint::submit_read(const ReadRequest& r, Cycle now) {
  if (!can_accept_read()) fail(Errc::CapacityExceeded, "read channel has no free slot");
  if (r.length == 0) fail(Errc::ContractViolation, "zero-length read burst");
  store_->check(r.addr, r.length);
  const auto beats = burst_beats(r.protocol, r.addr, r.length, bus_bytes_);
  reads_.push_back({r, now, beats, 0, r.addr, faulty(Side::Read, read_ordinal_, r.addr, r.length)});
  ++read_ordinal_;
}

void Endpoint::submit_write(const WriteRequest& w, Cycle now) {
  (void)now;
  if (!can_accept_write()) fail(Errc::CapacityExceeded, "write channel has no free slot");
  if (w.length == 0) fail(Errc::ContractViolation, "zero-length write burst");
  store_->check(w.addr, w.length);
  const auto beats = burst_beats(w.protocol, w.addr, w.length, bus_bytes_);
  writes_.push_back(
      {w, beats, 0, faulty(Side::Write, write_ordinal_, w.addr, w.length), std::nullopt});
  ++write_ordinal_;
}

std::optional<ReadBeat> Endpoint::peek_read(Cycle now) const {
  if (reads_.empty()) return std::nullopt;
  const auto& r = reads_.front();
  Cycle ready = r.accepted + model_.latency + r.delivered;
  if (any_read_delivered_) ready = std::max(ready, last_read_delivery_ + 1);
  if (ready > now) return std::nullopt;
  const Addr end = r.req.addr + r.req.length;
  const bool free = capabilities(r.req.protocol).address_free;
  const auto room = free ? bus_bytes_ : bus_bytes_ - r.cursor % bus_bytes_;
  ReadBeat b;
  b.addr = r.cursor;
  b.len = static_cast<std::uint32_t>(std::min<std::uint64_t>(room, end - r.cursor));
  b.first = r.delivered == 0;
  b.last = r.delivered + 1 == r.beats;
  b.error = r.error;
  b.tag = r.req.tag;
  b.ready = ready;
  return b;
}

ReadBeat Endpoint::pop_read(Cycle now, std::span<std::uint8_t> data) {
  auto b = peek_read(now);
  if (!b) fail(Errc::ContractViolation, "no read beat deliverable");
  if (data.size() < b->len) fail(Errc::ContractViolation, "read beat buffer too small");
  if (!b->error) store_->read(b->addr, data.first(b->len));
  auto& r = reads_.front();
  r.cursor += b->len;
  ++r.delivered;
  ++read_beats_;
  last_read_delivery_ = now;
  any_read_delivered_ = true;
  if (b->last) reads_.pop_front();
  return *b;
}

bool Endpoint::expecting_write_data() const {
  return std::any_of(writes_.begin(), writes_.end(),
                     [](const PendingWrite& w) { return w.received < w.beats; });
}

void Endpoint::push_write_beat(Cycle now, Addr addr, std::span<const std::uint8_t> data,
                               bool last) {
  auto it = std::find_if(writes_.begin(), writes_.end(),
                         [](const PendingWrite& w) { return w.received < w.beats; });
  if (it == writes_.end()) fail(Errc::ContractViolation, "write data without a request");
  if (addr < it->req.addr || addr + data.size() > it->req.addr + it->req.length) {
    fail(Errc::ContractViolation, "write beat outside its burst");
  }
  ++it->received;
  ++write_beats_;
  if (last != (it->received == it->beats)) {
    fail(Errc::ContractViolation, "write last flag does not match the burst length");
  }
  if (!it->error) store_->write(addr, data);
  if (last) it->response_at = now + model_.latency;
}

std::optional<WriteResponse> Endpoint::peek_b(Cycle now) const {
  if (writes_.empty()) return std::nullopt;
  const auto& w = writes_.front();
  if (!w.response_at || *w.response_at > now) return std::nullopt;
  return WriteResponse{w.req.tag, w.error, *w.response_at};
}

WriteResponse Endpoint::pop_b(Cycle now) {
  auto b = peek_b(now);
  if (!b) fail(Errc::ContractViolation, "no write response available");
  writes_.pop_front();
  return *b;
}

std::optional<Cycle> Endpoint::next_event() const {
  std::optional<Cycle> t;
  if (!reads_.empty()) {
    const auto& r = reads_.front();
    Cycle ready = r.accepted + model_.latency + r.delivered;
    if (any_read_delivered_) ready = std::max(ready, last_read_delivery_ + 1);
    t = ready;
  }
  if (!writes_.empty() && writes_.front().response_at) {
    t = t ? std::min(*t, *writes_.front().response_at) : *writes_.front().response_at;
  }
  return t;
}

}  // namespace idma
