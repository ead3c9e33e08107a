// SPDX-License-Identifier: Apache-2.0
//
// Memory endpoints: fixed-latency, in-order pipelines with a bounded number
// of outstanding requests per channel, backed by a sparse byte store.
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idma/core.hpp"

namespace idma {

// Sparse byte-addressable store. Unwritten bytes read as zero.
class MemoryStore {
 public:
  // size 0 maps the whole 64-bit space
  explicit MemoryStore(Addr base = 0, std::uint64_t size = 0);

  Addr base() const { return base_; }
  std::uint64_t size() const { return size_; }
  bool contains(Addr addr, std::uint64_t len) const;
  // Unmapped unless contains(addr, len).
  void check(Addr addr, std::uint64_t len) const;

  std::uint8_t read(Addr addr) const;
  void write(Addr addr, std::uint8_t v);
  void read(Addr addr, std::span<std::uint8_t> out) const;
  void write(Addr addr, std::span<const std::uint8_t> data);
  std::vector<std::uint8_t> read_range(Addr addr, std::uint64_t len) const;

  // Pages touched so far, for equality checks in tests.
  std::size_t pages() const { return pages_.size(); }

 private:
  static constexpr std::uint64_t kPage = 4096;
  using Page = std::array<std::uint8_t, kPage>;

  const Page* find(Addr page) const;
  Page& touch(Addr page);

  Addr base_;
  std::uint64_t size_;
  std::unordered_map<Addr, std::unique_ptr<Page>> pages_;
  mutable Addr last_key_ = ~Addr{0};
  mutable Page* last_page_ = nullptr;
};

// Injected fault: either the k-th burst (0-based, counted per channel) or any
// burst overlapping an address range.
struct ErrorRule {
  std::optional<std::uint64_t> burst;
  std::optional<Addr> range_begin;
  std::optional<Addr> range_end;  // exclusive
  Side side = Side::Read;
  std::string kind = "slverr";

  bool matches(Side s, std::uint64_t ordinal, Addr addr, std::uint64_t len) const;
  bool operator==(const ErrorRule&) const = default;
};

struct EndpointModel {
  Cycle latency = 1;
  unsigned max_outstanding = 1;
  unsigned width = 32;  // bits, equals the engine data width
  std::uint64_t size = 0;
  Addr base = 0;
  std::vector<ErrorRule> error_plan;

  bool operator==(const EndpointModel&) const = default;
};

inline constexpr std::string_view kPresetNames[] = {"sram", "rpc_dram", "hbm"};

// UnknownPreset for anything else.
EndpointModel preset(std::string_view name);

struct ReadRequest {
  Addr addr = 0;
  std::uint64_t length = 0;
  ProtocolId protocol = ProtocolId::Axi;
  std::uint64_t tag = 0;
};

struct ReadBeat {
  Addr addr = 0;          // first valid byte
  std::uint32_t len = 0;  // valid bytes in this beat
  bool first = false;
  bool last = false;
  bool error = false;
  std::uint64_t tag = 0;
  Cycle ready = 0;
};

struct WriteRequest {
  Addr addr = 0;
  std::uint64_t length = 0;
  ProtocolId protocol = ProtocolId::Axi;
  std::uint64_t tag = 0;
};

struct WriteResponse {
  std::uint64_t tag = 0;
  bool error = false;
  Cycle ready = 0;
};

// Cycle-level endpoint. Reads: beat j of a request accepted at cycle a is
// available at a + latency + j at the earliest, one beat per cycle, in
// order; the consumer may stall delivery. Writes: data beats follow request
// order; the response is available `latency` cycles after the last beat.
// Read and write channels each hold up to max_outstanding requests.
class Endpoint {
 public:
  Endpoint(EndpointModel model, std::shared_ptr<MemoryStore> store);

  const EndpointModel& model() const { return model_; }
  MemoryStore& store() { return *store_; }
  const MemoryStore& store() const { return *store_; }
  std::shared_ptr<MemoryStore> shared_store() const { return store_; }

  bool can_accept_read() const { return reads_.size() < model_.max_outstanding; }
  bool can_accept_write() const { return writes_.size() < model_.max_outstanding; }
  std::size_t reads_outstanding() const { return reads_.size(); }
  std::size_t writes_outstanding() const { return writes_.size(); }

  // CapacityExceeded when the channel is full; Unmapped outside the store.
  void submit_read(const ReadRequest& r, Cycle now);
  void submit_write(const WriteRequest& w, Cycle now);

  // Next read beat if it is deliverable at `now`.
  std::optional<ReadBeat> peek_read(Cycle now) const;
  // Delivers the beat and copies its bytes (unless it carries an error).
  ReadBeat pop_read(Cycle now, std::span<std::uint8_t> data);

  // Accepts one data beat for the oldest write still expecting data. Bytes
  // are committed when the beat arrives unless the write is marked faulty.
  void push_write_beat(Cycle now, Addr addr, std::span<const std::uint8_t> data, bool last);
  // Beats still expected for the oldest write in the data phase.
  bool expecting_write_data() const;

  std::optional<WriteResponse> peek_b(Cycle now) const;
  WriteResponse pop_b(Cycle now);

  bool idle() const { return reads_.empty() && writes_.empty(); }
  // Earliest cycle at which a response can appear, if any is pending.
  std::optional<Cycle> next_event() const;

  std::uint64_t read_beats() const { return read_beats_; }
  std::uint64_t write_beats() const { return write_beats_; }
  std::uint64_t read_bursts() const { return read_ordinal_; }
  std::uint64_t write_bursts() const { return write_ordinal_; }

 private:
  struct PendingRead {
    ReadRequest req;
    Cycle accepted;
    std::uint64_t beats;
    std::uint64_t delivered = 0;
    Addr cursor;
    bool error;
  };
  struct PendingWrite {
    WriteRequest req;
    std::uint64_t beats;
    std::uint64_t received = 0;
    bool error;
    std::optional<Cycle> response_at;
  };

  bool faulty(Side s, std::uint64_t ordinal, Addr addr, std::uint64_t len) const;

  EndpointModel model_;
  std::shared_ptr<MemoryStore> store_;
  std::uint64_t bus_bytes_;
  std::deque<PendingRead> reads_;
  std::deque<PendingWrite> writes_;
  Cycle last_read_delivery_ = 0;
  bool any_read_delivered_ = false;
  std::uint64_t read_ordinal_ = 0;
  std::uint64_t write_ordinal_ = 0;
  std::uint64_t read_beats_ = 0;
  std::uint64_t write_beats_ = 0;
};

}  // namespace idma
