// SPDX-License-Identifier: Apache-2.0
//
// Cycle-level back-end: legalizer, decoupled read/write managers, dataflow
// element with source/destination realignment, outstanding-burst credits,
// the Init pattern generator and the error handler.
//
// Per cycle, a back-end does the following in order:
//   1. send at most one W beat (oldest issued write burst)
//   2. take write acknowledgments
//   3. take at most one R beat into the dataflow element
//   4. resolve errors whose decision time has come
//   5. issue at most one read request (replays first)
//   6. issue at most one write request (replays first)
//   7. accept a new transfer into the legalizer
//
// The dataflow element holds (buffer_depth + 1) * bus bytes: buffer_depth
// entries plus the source shifter's staging register. Reads are not issued
// against reserved space; a full element back-pressures the R channel
// instead, and since endpoint read and write channels are independent the
// write side always drains it.
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "idma/core.hpp"
#include "idma/legalizer.hpp"
#include "idma/memsys.hpp"
#include "idma/metrics.hpp"
#include "idma/midend.hpp"

namespace idma {

// Back-end share of the launch latency: 2 with a legalizer, 1 without.
Cycle backend_latency(const EngineConfig& cfg);
// Launch to first read request for a given mid-end chain.
Cycle launch_latency(const EngineConfig& cfg, const std::vector<MidendSpec>& midends = {});

// Pattern generator behind the Init read manager. The sequence restarts for
// every 1D transfer.
class InitGenerator {
 public:
  explicit InitGenerator(InitPattern p);  // ZeroSeed for a zero pseudorandom seed

  std::uint8_t next();
  void fill(std::span<std::uint8_t> out);
  void skip(std::uint64_t n);

 private:
  InitPattern pattern_;
  std::uint64_t state_;
  std::uint64_t offset_ = 0;
};

std::vector<std::uint8_t> init_read(const InitPattern& pattern, std::uint64_t length);

// Pause notice handed to the error policy.
struct ErrorReport {
  std::uint64_t transfer = 0;  // back-end transfer number
  std::uint64_t launch_id = 0;
  Addr burst_addr = 0;
  std::uint64_t burst_length = 0;
  Side side = Side::Read;
  std::string cause;
  bool awaiting_action = true;
};

// Returns the action for a paused transfer, or nullopt to leave it paused
// until resolve_error() is called.
using ErrorPolicy = std::function<std::optional<ErrorAction>(const ErrorReport&)>;

// In-stream hook applied to bytes entering the dataflow element.
using StreamTransform =
    std::function<void(std::uint64_t launch_id, std::uint64_t offset, std::span<std::uint8_t>)>;

struct BackendParams {
  std::size_t index = 0;
  Cycle error_decision_cycles = 1;
  ErrorPolicy policy;            // default: the transfer's error_action_default
  StreamTransform transform;     // default: identity
  std::vector<TraceEvent>* trace = nullptr;
};

// Work item entering a back-end.
struct Job {
  std::uint64_t launch_id = 0;
  TransferDescriptor1D desc;
  Cycle launch_cycle = 0;
  Cycle avail = 0;  // earliest cycle the back-end may accept it
};

struct Completion {
  std::uint64_t launch_id = 0;
  std::uint64_t length = 0;
  Cycle cycle = 0;
  bool failed = false;
  ProtocolId src = ProtocolId::Axi;
  ProtocolId dst = ProtocolId::Axi;
};

class Backend {
 public:
  // `endpoints` maps each data protocol to its endpoint; an Init read port
  // is served internally.
  Backend(const ValidatedConfig& cfg, std::map<ProtocolId, Endpoint*> endpoints,
          BackendParams params = {});

  bool can_accept() const;
  // Takes `job` at cycle `now` (requires can_accept and job.avail <= now).
  void accept(const Job& job, Cycle now);

  void step(Cycle now);

  // Resolves the oldest paused error. NoPendingError when none waits.
  void resolve_error(ErrorAction action, Cycle now);
  std::optional<ErrorReport> pending_error() const;

  bool idle() const;
  // Cycle of the last observable progress.
  std::optional<Cycle> last_progress() const { return last_progress_; }
  // Whether anything can still change without outside input.
  std::optional<Cycle> next_wakeup(Cycle now) const;

  std::vector<Completion> take_completions();
  std::vector<std::pair<std::uint64_t, Cycle>> take_first_reads();
  std::vector<SkippedRange> take_skipped();

  std::vector<PortStats>& stats() { return stats_; }
  const std::vector<PortStats>& stats() const { return stats_; }

  std::size_t reads_in_flight() const { return reads_inflight_; }
  std::size_t writes_in_flight() const { return writes_inflight_; }
  std::size_t buffer_occupancy() const { return fifo_.size(); }
  std::size_t buffer_capacity() const { return capacity_; }

 private:
  enum class DataSource : std::uint8_t { Main, Replay, Null };

  struct ReplayJob {
    std::uint64_t transfer;
    std::uint64_t stream_off;
    std::uint64_t length;
    std::deque<LegalBurst> reads;
    std::deque<LegalBurst> writes;
    std::vector<std::uint8_t> data;
    std::uint64_t received = 0;
    std::uint64_t reads_outstanding = 0;
    std::uint64_t writes_outstanding = 0;
    bool closed = false;
    bool done() const {
      return reads.empty() && writes.empty() && reads_outstanding == 0 && writes_outstanding == 0;
    }
  };

  struct Transfer {
    std::uint64_t tid;
    Job job;
    TransferLegalizer legalizer;
    Cycle ready_at;
    std::uint64_t read_off = 0;   // stream offset of the next read burst
    std::uint64_t write_off = 0;  // stream offset of the next write burst
    std::uint64_t stream_in = 0;  // bytes entered into the dataflow element
    std::uint64_t stream_out = 0;
    std::uint64_t reads_inflight = 0;
    std::uint64_t writes_inflight = 0;
    std::uint64_t replays_open = 0;
    bool reads_dropped = false;
    bool writes_dropped = false;
    bool paused = false;
    bool failed = false;
    bool started = false;
    std::optional<InitGenerator> init;
  };

  struct ReadRec {
    std::uint64_t tag;
    std::uint64_t tid;
    LegalBurst burst;
    std::uint64_t stream_off;
    Endpoint* ep;
    std::optional<std::size_t> replay;  // replay job index
    std::uint64_t received = 0;
    bool error_seen = false;
  };

  struct WriteRec {
    std::uint64_t tag;
    std::uint64_t tid;
    LegalBurst burst;
    std::uint64_t stream_off;
    Endpoint* ep;
    DataSource source;
    std::optional<std::size_t> replay;
    std::uint64_t sent = 0;
  };

  struct PendingError {
    ErrorReport report;
    Cycle decide_at;
    std::uint64_t stream_off;
  };

  Transfer* find(std::uint64_t tid);
  Endpoint* endpoint(ProtocolId p);
  PortStats& stat(ProtocolId p);
  void trace(Cycle c, const char* event, Addr addr, std::uint64_t len, ProtocolId p);
  void progress(Cycle now);

  void step_w(Cycle now);
  void step_b(Cycle now);
  void step_r(Cycle now);
  void step_errors(Cycle now);
  void step_ar(Cycle now);
  void step_aw(Cycle now);
  void finish_ready(Cycle now);

  void raise_error(Cycle now, Transfer& t, const LegalBurst& b, std::uint64_t stream_off, Side side);
  void apply(const PendingError& e, ErrorAction action, Cycle now);
  void skip(const PendingError& e, Cycle now);
  void abort(Transfer& t, Cycle now);
  void replay(Transfer& t, std::uint64_t stream_off, std::uint64_t length, Cycle now);
  void close_if_done(std::size_t job);
  bool transfer_done(const Transfer& t) const;

  EngineConfig cfg_;
  std::map<ProtocolId, Endpoint*> endpoints_;
  std::vector<Endpoint*> write_eps_;
  BackendParams params_;
  std::unique_ptr<Endpoint> init_ep_;
  std::string unit_;
  std::size_t capacity_;
  Cycle be_latency_;

  std::map<std::uint64_t, Transfer> transfers_;
  std::uint64_t next_tid_ = 0;
  std::uint64_t next_tag_ = 0;
  std::deque<ReadRec> reads_;                            // AR order
  std::deque<std::uint64_t> w_order_;                    // AW order, data still owed
  std::unordered_map<std::uint64_t, WriteRec> writes_;   // by tag, until B
  std::deque<std::uint8_t> fifo_;
  std::vector<ReplayJob> replays_;
  std::deque<std::size_t> replay_queue_;  // jobs with work left
  std::deque<PendingError> errors_;
  std::size_t reads_inflight_ = 0;
  std::size_t writes_inflight_ = 0;

  std::vector<PortStats> stats_;
  std::map<ProtocolId, std::size_t> stat_index_;
  std::vector<Completion> completions_;
  std::vector<std::pair<std::uint64_t, Cycle>> first_reads_;
  std::vector<SkippedRange> skipped_;
  std::optional<Cycle> last_progress_;
};

}  // namespace idma
