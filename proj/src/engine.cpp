// SPDX-License-Identifier: Apache-2.0
#include "idma/engine.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>
#include <utility>

#include "idma/protocol.hpp"

namespace idma {

Cycle backend_latency(const EngineConfig& cfg) { return cfg.has_legalizer ? 2 : 1; }

Cycle launch_latency(const EngineConfig& cfg, const std::vector<MidendSpec>& midends) {
  Cycle l = backend_latency(cfg);
  for (const auto& m : midends) l += midend_latency(m);
  return l;
}

InitGenerator::InitGenerator(InitPattern p) : pattern_(p), state_(p.value) {
  if (p.kind == InitPattern::Kind::Pseudorandom && p.value == 0) {
    fail(Errc::ZeroSeed, "xorshift64 cannot start from a zero seed");
  }
}

std::uint8_t InitGenerator::next() {
  std::uint8_t v = 0;
  switch (pattern_.kind) {
    case InitPattern::Kind::Constant:
      v = static_cast<std::uint8_t>(pattern_.value);
      break;
    case InitPattern::Kind::Increment:
      v = static_cast<std::uint8_t>(pattern_.value + offset_);
      break;
    case InitPattern::Kind::Pseudorandom:
      if (offset_ % 8 == 0) {
        state_ ^= state_ << 13;
        state_ ^= state_ >> 7;
        state_ ^= state_ << 17;
      }
      v = static_cast<std::uint8_t>(state_ >> (8 * (offset_ % 8)));
      break;
  }
  ++offset_;
  return v;
}

void InitGenerator::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) b = next();
}

void InitGenerator::skip(std::uint64_t n) {
  if (pattern_.kind != InitPattern::Kind::Pseudorandom) {
    offset_ += n;
    return;
  }
  while (n--) next();
}

std::vector<std::uint8_t> init_read(const InitPattern& pattern, std::uint64_t length) {
  InitGenerator g(pattern);
  std::vector<std::uint8_t> out(length);
  g.fill(out);
  return out;
}

Backend::Backend(const ValidatedConfig& cfg, std::map<ProtocolId, Endpoint*> endpoints,
                 BackendParams params)
    : cfg_(cfg.get()),
      endpoints_(std::move(endpoints)),
      params_(std::move(params)),
      unit_("be" + std::to_string(params_.index)),
      capacity_((cfg_.buffer_depth + 1) * cfg_.bus_bytes()),
      be_latency_(backend_latency(cfg_)) {
  for (const auto& port : cfg_.ports) {
    if (stat_index_.count(port.protocol)) continue;
    if (port.protocol == ProtocolId::Init) {
      EndpointModel m;
      m.latency = 1;
      m.max_outstanding = std::numeric_limits<unsigned>::max();
      m.width = cfg_.dw;
      init_ep_ = std::make_unique<Endpoint>(m, std::make_shared<MemoryStore>());
    } else {
      auto it = endpoints_.find(port.protocol);
      if (it == endpoints_.end() || !it->second) {
        fail(Errc::ConfigError,
             "no memory endpoint bound to port " + std::string(protocol_name(port.protocol)));
      }
      if (it->second->model().width != cfg_.dw) {
        fail(Errc::ConfigError, "endpoint width differs from the engine data width");
      }
      if (std::find(write_eps_.begin(), write_eps_.end(), it->second) == write_eps_.end()) {
        write_eps_.push_back(it->second);
      }
    }
    PortStats s;
    s.name = std::string(protocol_name(port.protocol));
    s.backend = params_.index;
    s.bus_bytes = static_cast<unsigned>(cfg_.bus_bytes());
    stat_index_[port.protocol] = stats_.size();
    stats_.push_back(std::move(s));
  }
}

Backend::Transfer* Backend::find(std::uint64_t tid) {
  auto it = transfers_.find(tid);
  return it == transfers_.end() ? nullptr : &it->second;
}

Endpoint* Backend::endpoint(ProtocolId p) {
  if (p == ProtocolId::Init) return init_ep_.get();
  auto it = endpoints_.find(p);
  return it == endpoints_.end() ? nullptr : it->second;
}

PortStats& Backend::stat(ProtocolId p) { return stats_[stat_index_.at(p)]; }

void Backend::trace(Cycle c, const char* event, Addr addr, std::uint64_t len, ProtocolId p) {
  if (!params_.trace) return;
  params_.trace->push_back({c, unit_, event, addr, len, std::string(protocol_name(p))});
}

void Backend::progress(Cycle now) { last_progress_ = now; }

bool Backend::can_accept() const {
  std::size_t pending = 0;
  for (const auto& [tid, t] : transfers_) {
    if (!t.reads_dropped && !t.legalizer.done(Side::Read)) ++pending;
  }
  return pending < 2;
}

void Backend::accept(const Job& job, Cycle now) {
  if (job.avail > now) fail(Errc::ContractViolation, "job accepted before it is available");
  const auto& d = job.desc;
  if (d.length == 0) {
    if (cfg_.reject_zero_length) fail(Errc::ZeroLengthRejected, "zero-length transfer");
    completions_.push_back({job.launch_id, 0, now, false, d.src_protocol, d.dst_protocol});
    progress(now);
    return;
  }
  check_descriptor(d, cfg_);
  const auto tid = next_tid_++;
  Transfer t{tid, job, TransferLegalizer(d, cfg_.dw, cfg_.has_legalizer), now + be_latency_,
             0, 0, 0, 0, 0, 0, 0, false, false, false, false, false, std::nullopt};
  if (d.src_protocol == ProtocolId::Init) t.init.emplace(d.options.init);
  transfers_.emplace(tid, std::move(t));
  progress(now);
}

void Backend::step(Cycle now) {
  step_w(now);
  step_b(now);
  step_r(now);
  step_errors(now);
  step_ar(now);
  step_aw(now);
  finish_ready(now);
}

void Backend::step_w(Cycle now) {
  if (w_order_.empty()) return;
  auto& rec = writes_.at(w_order_.front());
  const std::uint64_t bw = cfg_.bus_bytes();
  const Addr cursor = rec.burst.addr + rec.sent;
  const auto room = capabilities(rec.burst.protocol).address_free ? bw : bw - cursor % bw;
  const auto n = std::min<std::uint64_t>(rec.burst.length - rec.sent, room);
  std::array<std::uint8_t, 128> buf{};
  std::span<const std::uint8_t> data;

  switch (rec.source) {
    case DataSource::Main: {
      auto* t = find(rec.tid);
      if (t->stream_in - t->stream_out < n) return;
      std::copy_n(fifo_.begin(), n, buf.begin());
      fifo_.erase(fifo_.begin(), fifo_.begin() + static_cast<std::ptrdiff_t>(n));
      t->stream_out += n;
      data = std::span<const std::uint8_t>(buf.data(), n);
      break;
    }
    case DataSource::Replay: {
      const auto& job = replays_[*rec.replay];
      const auto off = rec.stream_off - job.stream_off + rec.sent;
      data = std::span<const std::uint8_t>(job.data.data() + off, n);
      break;
    }
    case DataSource::Null:
      break;
  }
  const bool last = rec.sent + n == rec.burst.length;
  rec.ep->push_write_beat(now, cursor, data, last);
  ++stat(rec.burst.protocol).write_beats;
  rec.sent += n;
  if (last) w_order_.pop_front();
  progress(now);
}

void Backend::step_b(Cycle now) {
  for (auto* ep : write_eps_) {
    if (!ep->peek_b(now)) continue;
    const auto resp = ep->pop_b(now);
    auto it = writes_.find(resp.tag);
    if (it == writes_.end()) fail(Errc::ContractViolation, "acknowledgment for an unknown burst");
    const auto rec = it->second;
    writes_.erase(it);
    --writes_inflight_;
    stat(rec.burst.protocol).response(now);
    trace(now, "b", rec.burst.addr, rec.burst.length, rec.burst.protocol);
    progress(now);

    auto* t = find(rec.tid);
    if (rec.replay) {
      auto& job = replays_[*rec.replay];
      --job.writes_outstanding;
      if (resp.error && t) {
        skipped_.push_back({t->job.launch_id, rec.burst.addr, rec.burst.length, Side::Write});
        trace(now, "skip", rec.burst.addr, rec.burst.length, rec.burst.protocol);
      }
      close_if_done(*rec.replay);
      continue;
    }
    if (!t) continue;
    --t->writes_inflight;
    if (resp.error && !t->failed) raise_error(now, *t, rec.burst, rec.stream_off, Side::Write);
  }
}

void Backend::step_r(Cycle now) {
  if (reads_.empty()) return;
  auto& rec = reads_.front();
  const auto beat = rec.ep->peek_read(now);
  if (!beat) return;
  auto* t = find(rec.tid);
  const bool to_fifo = !rec.replay && t && !t->failed;
  if (to_fifo && fifo_.size() + beat->len > capacity_) return;  // back-pressure

  std::array<std::uint8_t, 128> buf{};
  const std::span<std::uint8_t> data(buf.data(), beat->len);
  rec.ep->pop_read(now, data);
  ++stat(rec.burst.protocol).read_beats;

  if (beat->error) {
    std::fill(data.begin(), data.end(), std::uint8_t{0});
    if (!rec.error_seen) {
      rec.error_seen = true;
      if (rec.replay) {
        if (t) {
          const auto dst = t->job.desc.dst_addr + rec.stream_off;
          skipped_.push_back({t->job.launch_id, dst, rec.burst.length, Side::Read});
          trace(now, "skip", dst, rec.burst.length, rec.burst.protocol);
        }
      } else if (t && !t->failed) {
        raise_error(now, *t, rec.burst, rec.stream_off, Side::Read);
      }
    }
  } else if (rec.burst.protocol == ProtocolId::Init && t) {
    if (rec.replay) {
      InitGenerator g(t->job.desc.options.init);
      g.skip(rec.stream_off + rec.received);
      g.fill(data);
    } else {
      t->init->fill(data);
    }
  }

  if (rec.replay) {
    auto& job = replays_[*rec.replay];
    const auto off = rec.stream_off - job.stream_off + rec.received;
    std::copy(data.begin(), data.end(), job.data.begin() + static_cast<std::ptrdiff_t>(off));
    job.received += beat->len;
  } else if (to_fifo) {
    if (params_.transform) params_.transform(t->job.launch_id, t->stream_in, data);
    fifo_.insert(fifo_.end(), data.begin(), data.end());
    t->stream_in += beat->len;
  }
  rec.received += beat->len;
  progress(now);

  if (beat->last) {
    stat(rec.burst.protocol).response(now);
    trace(now, "r_last", rec.burst.addr, rec.burst.length, rec.burst.protocol);
    --reads_inflight_;
    const auto replay_idx = rec.replay;
    reads_.pop_front();
    if (replay_idx) {
      --replays_[*replay_idx].reads_outstanding;
      close_if_done(*replay_idx);
    } else if (t) {
      --t->reads_inflight;
    }
  }
}

void Backend::raise_error(Cycle now, Transfer& t, const LegalBurst& b, std::uint64_t stream_off,
                          Side side) {
  trace(now, "error", b.addr, b.length, b.protocol);
  ErrorReport r;
  r.transfer = t.tid;
  r.launch_id = t.job.launch_id;
  r.burst_addr = b.addr;
  r.burst_length = b.length;
  r.side = side;
  r.cause = "slverr";
  PendingError e{r, now + params_.error_decision_cycles, stream_off};
  if (!cfg_.has_error_handler) {
    skip(e, now);
    return;
  }
  t.paused = true;
  errors_.push_back(std::move(e));
}

void Backend::step_errors(Cycle now) {
  while (!errors_.empty() && errors_.front().decide_at <= now) {
    const auto& e = errors_.front();
    std::optional<ErrorAction> action;
    if (params_.policy) {
      action = params_.policy(e.report);
    } else if (const auto* t = find(e.report.transfer)) {
      action = t->job.desc.options.error_action_default;
    } else {
      action = ErrorAction::Continue;
    }
    if (!action) return;
    const auto pending = e;
    errors_.pop_front();
    apply(pending, *action, now);
  }
}

void Backend::resolve_error(ErrorAction action, Cycle now) {
  if (errors_.empty()) fail(Errc::NoPendingError, "no paused transfer awaits an action");
  const auto e = errors_.front();
  errors_.pop_front();
  apply(e, action, now);
}

std::optional<ErrorReport> Backend::pending_error() const {
  if (errors_.empty()) return std::nullopt;
  return errors_.front().report;
}

void Backend::apply(const PendingError& e, ErrorAction action, Cycle now) {
  auto* t = find(e.report.transfer);
  progress(now);
  if (!t) return;
  t->paused = std::any_of(errors_.begin(), errors_.end(), [&](const PendingError& o) {
    return o.report.transfer == t->tid;
  });
  if (t->failed) return;
  switch (action) {
    case ErrorAction::Continue:
      skip(e, now);
      break;
    case ErrorAction::Abort:
      abort(*t, now);
      break;
    case ErrorAction::Replay:
      replay(*t, e.stream_off, e.report.burst_length, now);
      break;
  }
}

void Backend::skip(const PendingError& e, Cycle now) {
  auto* t = find(e.report.transfer);
  if (!t) return;
  const auto dst = t->job.desc.dst_addr + e.stream_off;
  skipped_.push_back({t->job.launch_id, dst, e.report.burst_length, e.report.side});
  trace(now, "skip", dst, e.report.burst_length, t->job.desc.dst_protocol);
}

void Backend::abort(Transfer& t, Cycle now) {
  trace(now, "abort", t.job.desc.src_addr, t.job.desc.length, t.job.desc.src_protocol);
  t.failed = true;
  t.paused = false;
  t.reads_dropped = true;
  t.writes_dropped = true;

  // Bytes of older transfers sit ahead of this one in the element.
  std::uint64_t ahead = 0;
  for (const auto& [tid, other] : transfers_) {
    if (tid == t.tid) break;
    ahead += other.stream_in - other.stream_out;
  }
  const auto mine = t.stream_in - t.stream_out;
  const auto first = fifo_.begin() + static_cast<std::ptrdiff_t>(ahead);
  fifo_.erase(first, first + static_cast<std::ptrdiff_t>(mine));
  t.stream_out = t.stream_in;

  for (auto tag : w_order_) {
    auto& rec = writes_.at(tag);
    if (rec.tid == t.tid && rec.source == DataSource::Main) rec.source = DataSource::Null;
  }
  errors_.erase(std::remove_if(errors_.begin(), errors_.end(),
                               [&](const PendingError& e) { return e.report.transfer == t.tid; }),
                errors_.end());
  for (std::size_t i = 0; i < replays_.size(); ++i) {
    auto& job = replays_[i];
    if (job.transfer != t.tid || job.closed) continue;
    job.reads.clear();
    job.writes.clear();
    close_if_done(i);
  }
}

void Backend::replay(Transfer& t, std::uint64_t stream_off, std::uint64_t length, Cycle now) {
  const auto& d = t.job.desc;
  ReplayJob job;
  job.transfer = t.tid;
  job.stream_off = stream_off;
  job.length = length;
  job.data.assign(length, 0);
  auto bursts = [&](Addr addr, ProtocolId p, Side side) {
    std::deque<LegalBurst> out;
    if (!cfg_.has_legalizer) {
      out.push_back({addr, length, side, p, 0});
    } else {
      for (const auto& b : legalize_side(addr, length, p, cfg_.dw, side_cap(d.options, side, cfg_.dw),
                                         side)) {
        out.push_back(b);
      }
    }
    return out;
  };
  job.reads = bursts(d.src_addr + stream_off, d.src_protocol, Side::Read);
  job.writes = bursts(d.dst_addr + stream_off, d.dst_protocol, Side::Write);
  trace(now, "replay", d.src_addr + stream_off, length, d.src_protocol);
  ++t.replays_open;
  replay_queue_.push_back(replays_.size());
  replays_.push_back(std::move(job));
}

void Backend::close_if_done(std::size_t idx) {
  auto& job = replays_[idx];
  if (job.closed || !job.done()) return;
  job.closed = true;
  if (auto* t = find(job.transfer)) --t->replays_open;
  replay_queue_.erase(std::remove(replay_queue_.begin(), replay_queue_.end(), idx),
                      replay_queue_.end());
}

void Backend::step_ar(Cycle now) {
  if (reads_inflight_ >= cfg_.nax_read) return;

  for (auto idx : replay_queue_) {
    auto& job = replays_[idx];
    if (job.reads.empty()) continue;
    const auto b = job.reads.front();
    auto* ep = endpoint(b.protocol);
    if (!ep->can_accept_read()) return;
    job.reads.pop_front();
    const auto tag = next_tag_++;
    const auto off = job.stream_off + (b.addr - (find(job.transfer)->job.desc.src_addr + job.stream_off));
    ep->submit_read({b.addr, b.length, b.protocol, tag}, now);
    reads_.push_back({tag, job.transfer, b, off, ep, idx});
    ++job.reads_outstanding;
    ++reads_inflight_;
    ++stat(b.protocol).read_bursts;
    stat(b.protocol).request(now);
    trace(now, "ar", b.addr, b.length, b.protocol);
    progress(now);
    return;
  }

  for (auto& [tid, t] : transfers_) {
    if (t.reads_dropped || t.legalizer.done(Side::Read)) continue;
    if (t.paused || t.ready_at > now) return;
    const auto& b = t.legalizer.peek(Side::Read);
    auto* ep = endpoint(b.protocol);
    if (!ep->can_accept_read()) return;
    if (!cfg_.has_legalizer && !is_legal_burst(b.protocol, b.addr, b.length, cfg_.dw)) {
      fail(Errc::ContractViolation, "illegal read burst reached the " +
                                        std::string(protocol_name(b.protocol)) + " manager");
    }
    const auto burst = t.legalizer.pop(Side::Read);
    const auto tag = next_tag_++;
    ep->submit_read({burst.addr, burst.length, burst.protocol, tag}, now);
    reads_.push_back({tag, tid, burst, t.read_off, ep, std::nullopt});
    t.read_off += burst.length;
    ++t.reads_inflight;
    ++reads_inflight_;
    ++stat(burst.protocol).read_bursts;
    stat(burst.protocol).request(now);
    trace(now, "ar", burst.addr, burst.length, burst.protocol);
    if (!t.started) {
      t.started = true;
      first_reads_.emplace_back(t.job.launch_id, now);
    }
    progress(now);
    return;
  }
}

void Backend::step_aw(Cycle now) {
  if (writes_inflight_ >= cfg_.nax_write) return;

  for (auto idx : replay_queue_) {
    auto& job = replays_[idx];
    if (job.writes.empty() || !job.reads.empty() || job.reads_outstanding > 0) continue;
    const auto* t = find(job.transfer);
    // the replayed bytes must land after the original write of the range
    if (t->stream_out < job.stream_off + job.length) continue;
    const auto b = job.writes.front();
    auto* ep = endpoint(b.protocol);
    if (!ep->can_accept_write()) return;
    job.writes.pop_front();
    const auto tag = next_tag_++;
    const auto off = job.stream_off + (b.addr - (t->job.desc.dst_addr + job.stream_off));
    ep->submit_write({b.addr, b.length, b.protocol, tag}, now);
    writes_.emplace(tag, WriteRec{tag, job.transfer, b, off, ep, DataSource::Replay, idx});
    w_order_.push_back(tag);
    ++job.writes_outstanding;
    ++writes_inflight_;
    ++stat(b.protocol).write_bursts;
    stat(b.protocol).request(now);
    trace(now, "aw", b.addr, b.length, b.protocol);
    progress(now);
    return;
  }

  for (auto& [tid, t] : transfers_) {
    if (t.writes_dropped || t.legalizer.done(Side::Write)) continue;
    if (t.paused || t.stream_in <= t.write_off) return;
    const auto& b = t.legalizer.peek(Side::Write);
    auto* ep = endpoint(b.protocol);
    if (!ep->can_accept_write()) return;
    if (!cfg_.has_legalizer && !is_legal_burst(b.protocol, b.addr, b.length, cfg_.dw)) {
      fail(Errc::ContractViolation, "illegal write burst reached the " +
                                        std::string(protocol_name(b.protocol)) + " manager");
    }
    const auto burst = t.legalizer.pop(Side::Write);
    const auto tag = next_tag_++;
    ep->submit_write({burst.addr, burst.length, burst.protocol, tag}, now);
    writes_.emplace(tag, WriteRec{tag, tid, burst, t.write_off, ep, DataSource::Main, std::nullopt});
    w_order_.push_back(tag);
    t.write_off += burst.length;
    ++t.writes_inflight;
    ++writes_inflight_;
    ++stat(burst.protocol).write_bursts;
    stat(burst.protocol).request(now);
    trace(now, "aw", burst.addr, burst.length, burst.protocol);
    progress(now);
    return;
  }
}

bool Backend::transfer_done(const Transfer& t) const {
  if (t.paused || t.reads_inflight > 0 || t.writes_inflight > 0 || t.replays_open > 0) return false;
  if (t.stream_in != t.stream_out) return false;
  const bool reads_over = t.reads_dropped || t.legalizer.done(Side::Read);
  const bool writes_over = t.writes_dropped || t.legalizer.done(Side::Write);
  if (!reads_over || !writes_over) return false;
  // issued writes still owing data keep the transfer open
  return std::none_of(w_order_.begin(), w_order_.end(),
                      [&](std::uint64_t tag) { return writes_.at(tag).tid == t.tid; });
}

void Backend::finish_ready(Cycle now) {
  for (auto it = transfers_.begin(); it != transfers_.end();) {
    auto& t = it->second;
    if (!transfer_done(t)) {
      ++it;
      continue;
    }
    const auto& d = t.job.desc;
    completions_.push_back({t.job.launch_id, d.length, now, t.failed, d.src_protocol, d.dst_protocol});
    if (!t.failed) {
      stat(d.src_protocol).payload_bytes += d.length;
      trace(now, "payload", d.src_addr, d.length, d.src_protocol);
      if (stat_index_.at(d.dst_protocol) != stat_index_.at(d.src_protocol)) {
        stat(d.dst_protocol).payload_bytes += d.length;
        trace(now, "payload", d.dst_addr, d.length, d.dst_protocol);
      }
    }
    it = transfers_.erase(it);
    progress(now);
  }
}

bool Backend::idle() const {
  return transfers_.empty() && reads_.empty() && writes_.empty() && w_order_.empty() &&
         errors_.empty();
}

std::optional<Cycle> Backend::next_wakeup(Cycle now) const {
  std::optional<Cycle> t;
  auto consider = [&](std::optional<Cycle> c) {
    if (!c) return;
    const auto v = std::max(*c, now + 1);
    t = t ? std::min(*t, v) : v;
  };
  for (auto* ep : write_eps_) consider(ep->next_event());
  if (init_ep_) consider(init_ep_->next_event());
  for (const auto& [tid, tr] : transfers_) {
    if (tr.ready_at > now) consider(tr.ready_at);
  }
  for (const auto& e : errors_) consider(e.decide_at);
  return t;
}

std::vector<Completion> Backend::take_completions() { return std::exchange(completions_, {}); }

std::vector<std::pair<std::uint64_t, Cycle>> Backend::take_first_reads() {
  return std::exchange(first_reads_, {});
}

std::vector<SkippedRange> Backend::take_skipped() { return std::exchange(skipped_, {}); }

}  // namespace idma
