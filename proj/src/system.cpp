// SPDX-License-Identifier: Apache-2.0
#include "idma/system.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <random>
#include <set>

namespace idma {

namespace {

constexpr std::size_t kQueueDepth = 2;

struct Item {
  std::uint64_t launch_id = 0;
  NdTransferDescriptor desc;
  Cycle avail = 0;
};

using Queue = std::deque<Item>;

bool has_room(const Queue& q) { return q.size() < kQueueDepth; }

void wake(std::optional<Cycle>& t, Cycle c) { t = t ? std::min(*t, c) : c; }

NdTransferDescriptor as_nd(const TransferDescriptor1D& d) { return {d, {}}; }

// Bookkeeping of every launch and the pieces it still has in flight.
class Launches {
 public:
  explicit Launches(std::vector<TraceEvent>* trace) : trace_(trace) {}

  std::uint64_t open(Cycle c, const NdTransferDescriptor& d, std::uint64_t pieces = 1) {
    const auto id = next_++;
    index_[id] = records_.size();
    LaunchRecord r;
    r.id = id;
    r.launch = c;
    r.bytes = d.total_bytes();
    records_.push_back(r);
    outstanding_[id] = pieces;
    ++open_;
    if (trace_) {
      trace_->push_back({c, "fe", "launch", d.base.src_addr, r.bytes,
                         std::string(protocol_name(d.base.src_protocol))});
    }
    return id;
  }

  void add(std::uint64_t id, std::uint64_t extra) { outstanding_.at(id) += extra; }

  Cycle launch_cycle(std::uint64_t id) const { return records_[index_.at(id)].launch; }

  void first_read(std::uint64_t id, Cycle c) {
    auto& r = records_[index_.at(id)];
    if (!r.first_read || c < *r.first_read) r.first_read = c;
  }

  // True when the launch has no pieces left.
  bool complete(std::uint64_t id, Cycle c, bool failed) {
    auto& r = records_[index_.at(id)];
    r.failed = r.failed || failed;
    auto& n = outstanding_.at(id);
    if (n == 0) fail(Errc::ContractViolation, "completion for a finished launch");
    if (--n == 0) {
      r.completion = c;
      --open_;
      return true;
    }
    return false;
  }

  bool all_done() const { return open_ == 0; }
  std::vector<LaunchRecord> take() { return std::move(records_); }

 private:
  std::vector<TraceEvent>* trace_;
  std::uint64_t next_ = 1;
  std::vector<LaunchRecord> records_;
  std::map<std::uint64_t, std::size_t> index_;
  std::map<std::uint64_t, std::uint64_t> outstanding_;
  std::uint64_t open_ = 0;
};

class FrontendSim {
 public:
  virtual ~FrontendSim() = default;
  virtual bool step(Cycle now, Queue& out, Launches& launches) = 0;
  virtual bool done() const = 0;
  virtual std::optional<Cycle> wakeup(Cycle now) const = 0;
  virtual void completed(std::uint64_t /*launch_id*/) {}
  virtual void collect(std::vector<PortStats>& /*ports*/) const {}
};

class DirectFrontend : public FrontendSim {
 public:
  DirectFrontend(std::vector<TransferSpec> work, Cycle occupancy)
      : work_(std::move(work)), occupancy_(std::max<Cycle>(occupancy, 1)) {}

  bool step(Cycle now, Queue& out, Launches& launches) override {
    if (done() || now < earliest() || !has_room(out)) return false;
    const auto& t = work_[next_++];
    out.push_back({launches.open(now, t.desc), t.desc, now});
    free_at_ = now + occupancy_;
    return true;
  }
  bool done() const override { return next_ == work_.size(); }
  std::optional<Cycle> wakeup(Cycle now) const override {
    if (done()) return std::nullopt;
    return std::max(now + 1, earliest());
  }

 private:
  Cycle earliest() const { return std::max(free_at_, work_[next_].at); }

  std::vector<TransferSpec> work_;
  Cycle occupancy_;
  std::size_t next_ = 0;
  Cycle free_at_ = 0;
};

// Programs the register file one access per cycle, then reads the transfer
// ID register to launch.
class RegFrontend : public FrontendSim {
 public:
  explicit RegFrontend(std::vector<TransferSpec> work) : work_(std::move(work)) {}

  bool step(Cycle now, Queue& out, Launches& launches) override {
    if (done()) return false;
    if (program_.empty()) {
      if (now < work_[next_].at) return false;
      plan(work_[next_].desc);
    }
    const auto [offset, value] = program_.front();
    const bool launch = offset == reg::kTransferId;
    if (launch && !has_room(out)) return false;
    auto res = reg_access(state_, offset, launch, value);
    state_ = res.state;
    program_.pop_front();
    if (launch) {
      auto desc = res.launch->desc;
      desc.base.options = work_[next_].desc.base.options;
      desc.base.options.error_action_default = res.launch->desc.base.options.error_action_default;
      out.push_back({launches.open(now, desc), desc, now});
      ++next_;
    }
    return true;
  }
  bool done() const override { return next_ == work_.size(); }
  std::optional<Cycle> wakeup(Cycle now) const override {
    if (done()) return std::nullopt;
    return program_.empty() ? std::max(now + 1, work_[next_].at) : now + 1;
  }
  void completed(std::uint64_t id) override {
    if (id > state_.last_completed_id) state_ = reg_complete(state_, id);
  }

 private:
  void set(std::uint32_t offset, std::uint32_t current, std::uint32_t value, bool always) {
    if (always || current != value) program_.emplace_back(offset, value);
  }

  void plan(const NdTransferDescriptor& d) {
    BackendConfigBits bits{d.base.src_protocol, d.base.dst_protocol,
                           d.base.options.error_action_default};
    set(reg::kSrc, state_.src_address, static_cast<std::uint32_t>(d.base.src_addr), true);
    set(reg::kDst, state_.dst_address, static_cast<std::uint32_t>(d.base.dst_addr), true);
    set(reg::kLength, state_.transfer_length, static_cast<std::uint32_t>(d.base.length), true);
    set(reg::kConfig, state_.configuration,
        static_cast<std::uint32_t>(encode_backend_config(bits)), true);
    constexpr std::uint32_t kStride[2][2] = {{reg::kDim2SrcStride, reg::kDim2DstStride},
                                             {reg::kDim3SrcStride, reg::kDim3DstStride}};
    constexpr std::uint32_t kReps[2] = {reg::kDim2Reps, reg::kDim3Reps};
    for (std::size_t k = 0; k < 2; ++k) {
      const Dimension dim = k < d.dims.size() ? d.dims[k] : Dimension{0, 0, 1};
      set(kStride[k][0], state_.src_stride[k], static_cast<std::uint32_t>(dim.src_stride), false);
      set(kStride[k][1], state_.dst_stride[k], static_cast<std::uint32_t>(dim.dst_stride), false);
      set(kReps[k], state_.reps[k], static_cast<std::uint32_t>(dim.reps), false);
    }
    program_.emplace_back(reg::kTransferId, 0);
  }

  std::vector<TransferSpec> work_;
  std::size_t next_ = 0;
  RegFileState state_;
  std::deque<std::pair<std::uint32_t, std::uint32_t>> program_;
};

// Walks a descriptor chain in memory through its own read endpoint. The
// next fetch goes out as soon as the next pointer (the first eight bytes)
// has arrived; a descriptor launches once all its bytes are in.
class DescFrontend : public FrontendSim {
 public:
  DescFrontend(const FrontendConfig& cfg, std::unique_ptr<Endpoint> ep, Addr head,
               BackendOptions defaults, std::vector<TraceEvent>* trace)
      : cfg_(cfg), ep_(std::move(ep)), defaults_(std::move(defaults)), trace_(trace) {
    if (head != kDescEnd) pending_ = head;
    stats_.name = "desc";
    stats_.bus_bytes = ep_->model().width / 8;
  }

  bool step(Cycle now, Queue& out, Launches& launches) override {
    bool moved = false;
    if (auto beat = ep_->peek_read(now)) {
      if (beat->error) fail(Errc::Unmapped, "descriptor fetch returned an error");
      auto& f = fetches_.front();
      std::vector<std::uint8_t> buf(beat->len);
      ep_->pop_read(now, buf);
      f.bytes.insert(f.bytes.end(), buf.begin(), buf.end());
      ++stats_.read_beats;
      stats_.response(now);
      if (!f.next_known && f.bytes.size() >= 8) {
        f.next_known = true;
        const auto next = decode_descriptor(padded(f.bytes)).next_ptr;
        if (next != kDescEnd) pending_ = next;
      }
      if (beat->last) {
        ready_.push_back(to_transfer(decode_descriptor(f.bytes), defaults_));
        if (trace_) trace_->push_back({now, "desc", "r_last", f.ptr, kDescBytes, "desc"});
        fetches_.pop_front();
      }
      moved = true;
    }
    if (!ready_.empty() && has_room(out)) {
      auto desc = as_nd(ready_.front());
      ready_.pop_front();
      out.push_back({launches.open(now, desc), desc, now});
      moved = true;
    }
    if (pending_ && ep_->can_accept_read() && fetches_.size() + ready_.size() < cfg_.prefetch) {
      const Addr ptr = *pending_;
      if (ptr % 8 != 0) fail(Errc::Misaligned, "descriptor pointer is not 8-byte aligned");
      if (++fetched_ > cfg_.max_chain) fail(Errc::ChainTooLong, "descriptor chain too long");
      ep_->submit_read({ptr, kDescBytes, ProtocolId::Axi, fetched_}, now);
      ++stats_.read_bursts;
      stats_.request(now);
      if (trace_) trace_->push_back({now, "desc", "ar", ptr, kDescBytes, "desc"});
      fetches_.push_back({ptr, {}, false});
      pending_.reset();
      moved = true;
    }
    return moved;
  }

  bool done() const override { return !pending_ && fetches_.empty() && ready_.empty(); }
  std::optional<Cycle> wakeup(Cycle now) const override {
    std::optional<Cycle> t;
    if (auto e = ep_->next_event()) wake(t, std::max(*e, now + 1));
    if (!ready_.empty() || (pending_ && ep_->can_accept_read())) wake(t, now + 1);
    return t;
  }
  void collect(std::vector<PortStats>& ports) const override { ports.push_back(stats_); }

 private:
  struct Fetch {
    Addr ptr;
    std::vector<std::uint8_t> bytes;
    bool next_known;
  };

  static std::vector<std::uint8_t> padded(std::vector<std::uint8_t> b) {
    b.resize(kDescBytes, 0);
    return b;
  }

  FrontendConfig cfg_;
  std::unique_ptr<Endpoint> ep_;
  BackendOptions defaults_;
  std::vector<TraceEvent>* trace_;
  std::optional<Addr> pending_;
  std::deque<Fetch> fetches_;
  std::deque<TransferDescriptor1D> ready_;
  std::uint64_t fetched_ = 0;
  PortStats stats_;
};

class StageSim {
 public:
  virtual ~StageSim() = default;
  virtual bool step(Cycle now, Queue& in, std::vector<Queue>& outs, Launches& launches) = 0;
  virtual bool idle() const = 0;
  virtual std::optional<Cycle> wakeup(Cycle now, const Queue& in,
                                      const std::vector<Queue>& outs) const {
    if (!idle() && has_room(outs[0])) return now + 1;
    if (!in.empty()) return std::max(now + 1, in.front().avail);
    return std::nullopt;
  }
};

// tensor_nd and tensor_2d: one 1D piece per cycle.
class ExpandStage : public StageSim {
 public:
  ExpandStage(std::size_t max_dims, Cycle latency, unsigned aw, std::string name)
      : max_dims_(max_dims), latency_(latency), aw_(aw), name_(std::move(name)) {}

  bool step(Cycle now, Queue& in, std::vector<Queue>& outs, Launches& launches) override {
    bool moved = false;
    if (!cur_ && !in.empty() && in.front().avail <= now) {
      auto item = std::move(in.front());
      in.pop_front();
      if (item.desc.dims.size() > max_dims_) {
        fail(Errc::ConfigError, name_ + " handles at most " + std::to_string(max_dims_) +
                                    " outer dimensions");
      }
      check_nd_bounds(item.desc, aw_);
      cur_.emplace(item.desc);
      id_ = item.launch_id;
      launches.add(id_, cur_->count() - 1);
      moved = true;
    }
    if (cur_ && has_room(outs[0])) {
      outs[0].push_back({id_, as_nd(cur_->next()), now + latency_});
      if (cur_->done()) cur_.reset();
      moved = true;
    }
    return moved;
  }
  bool idle() const override { return !cur_; }

 private:
  std::size_t max_dims_;
  Cycle latency_;
  unsigned aw_;
  std::string name_;
  std::optional<NdIterator> cur_;
  std::uint64_t id_ = 0;
};

std::uint64_t require_1d(const Item& item, std::string_view stage) {
  if (!item.desc.dims.empty()) {
    fail(Errc::ConfigError, std::string(stage) + " takes 1D descriptors; put a tensor mid-end first");
  }
  return item.launch_id;
}

class SplitStage : public StageSim {
 public:
  explicit SplitStage(MpSplitSpec spec) : spec_(spec) {}

  bool step(Cycle now, Queue& in, std::vector<Queue>& outs, Launches& launches) override {
    bool moved = false;
    if (pieces_.empty() && !in.empty() && in.front().avail <= now) {
      id_ = require_1d(in.front(), "mp_split");
      auto pieces = split_at_boundary(in.front().desc.base, spec_.boundary, spec_.side);
      in.pop_front();
      launches.add(id_, pieces.size() - 1);
      pieces_.assign(pieces.begin(), pieces.end());
      moved = true;
    }
    if (!pieces_.empty() && has_room(outs[0])) {
      outs[0].push_back({id_, as_nd(pieces_.front()), now + 1});
      pieces_.pop_front();
      moved = true;
    }
    return moved;
  }
  bool idle() const override { return pieces_.empty(); }

 private:
  MpSplitSpec spec_;
  std::deque<TransferDescriptor1D> pieces_;
  std::uint64_t id_ = 0;
};

class DistStage : public StageSim {
 public:
  explicit DistStage(MpDistSpec spec) : spec_(spec) {}

  bool step(Cycle now, Queue& in, std::vector<Queue>& outs, Launches&) override {
    if (in.empty() || in.front().avail > now) return false;
    require_1d(in.front(), "mp_dist");
    const auto& d = in.front().desc.base;
    const TransferDescriptor1D one[] = {d};
    // The routing decision itself comes from the functional distributor.
    const auto routed = distribute(one, spec_.ports, spec_.boundary, spec_.side,
                                   DistPolicy::AddressModulo);
    std::size_t port = 0;
    while (routed[port].empty()) ++port;
    if (spec_.policy == DistPolicy::RoundRobin) port = rr_ % spec_.ports;
    if (!has_room(outs[port])) return false;
    auto item = std::move(in.front());
    in.pop_front();
    item.avail = now + 1;
    outs[port].push_back(std::move(item));
    ++rr_;
    return true;
  }
  bool idle() const override { return true; }
  std::optional<Cycle> wakeup(Cycle now, const Queue& in,
                              const std::vector<Queue>&) const override {
    if (!in.empty()) return std::max(now + 1, in.front().avail);
    return std::nullopt;
  }

 private:
  MpDistSpec spec_;
  std::uint64_t rr_ = 0;
};

class RtStage : public StageSim {
 public:
  explicit RtStage(const RtConfig& cfg) : cfg_(cfg), arb_(cfg) {}

  bool step(Cycle now, Queue& in, std::vector<Queue>& outs, Launches& launches) override {
    bool moved = false;
    while (!in.empty() && in.front().avail <= now) {
      auto item = std::move(in.front());
      in.pop_front();
      launches.add(item.launch_id, item.desc.count() - 1);
      arb_.submit_bypass({item.avail, std::move(item.desc), item.launch_id});
      moved = true;
    }
    if (!has_room(outs[0])) return moved;
    auto ev = arb_.tick(now);
    if (!ev) return moved;
    std::uint64_t id = ev->index;
    if (ev->periodic) {
      if (ev->first) {
        const Cycle due = cfg_.start + ev->index * cfg_.period;
        periodic_[ev->index] = launches.open(due, cfg_.shape, cfg_.shape.count());
      }
      id = periodic_.at(ev->index);
    }
    outs[0].push_back({id, as_nd(ev->desc), now + 1});
    return true;
  }
  bool idle() const override { return arb_.finished(); }
  std::optional<Cycle> wakeup(Cycle now, const Queue& in,
                              const std::vector<Queue>& outs) const override {
    std::optional<Cycle> t;
    if (!in.empty()) wake(t, std::max(now + 1, in.front().avail));
    if (has_room(outs[0])) {
      if (auto r = arb_.next_ready(now + 1)) wake(t, *r);
    }
    return t;
  }

 private:
  RtConfig cfg_;
  RtArbiter arb_;
  std::map<std::uint64_t, std::uint64_t> periodic_;
};

bool is_expander(const MidendSpec& m) {
  return std::holds_alternative<TensorNdSpec>(m) || std::holds_alternative<Tensor2dSpec>(m) ||
         std::holds_alternative<Rt3dSpec>(m);
}

std::unique_ptr<StageSim> make_stage(const MidendSpec& m, unsigned aw) {
  if (const auto* nd = std::get_if<TensorNdSpec>(&m)) {
    if (nd->dims == 0) fail(Errc::ConfigError, "tensor_nd needs at least one dimension");
    return std::make_unique<ExpandStage>(nd->dims - 1, midend_latency(m), aw, "tensor_nd");
  }
  if (std::holds_alternative<Tensor2dSpec>(m)) {
    return std::make_unique<ExpandStage>(1, 1, aw, "tensor_2d");
  }
  if (const auto* s = std::get_if<MpSplitSpec>(&m)) return std::make_unique<SplitStage>(*s);
  if (const auto* d = std::get_if<MpDistSpec>(&m)) return std::make_unique<DistStage>(*d);
  return std::make_unique<RtStage>(std::get<Rt3dSpec>(m).rt);
}

bool is_data_port(std::string_view port) { return port != "desc"; }

std::uint64_t parse_u64(std::string_view name, std::string_view v) {
  std::uint64_t out = 0;
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    v.remove_prefix(2);
    base = 16;
  }
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    fail(Errc::ConfigError, "bad value '" + std::string(v) + "' for " + std::string(name));
  }
  return out;
}

unsigned parse_uint(std::string_view name, std::string_view v) {
  const auto x = parse_u64(name, v);
  if (x > std::numeric_limits<unsigned>::max()) {
    fail(Errc::ConfigError, std::string(name) + " out of range");
  }
  return static_cast<unsigned>(x);
}

void fill_range(MemoryStore& mem, Addr addr, std::uint64_t len, FillKind fill,
                std::mt19937_64& rng) {
  std::vector<std::uint8_t> buf(len);
  for (std::uint64_t i = 0; i < len; ++i) {
    switch (fill) {
      case FillKind::Random: buf[i] = static_cast<std::uint8_t>(rng()); break;
      case FillKind::Increment: buf[i] = static_cast<std::uint8_t>(addr + i); break;
      case FillKind::Zero: buf[i] = 0; break;
    }
  }
  mem.write(addr, buf);
}

}  // namespace

std::string_view frontend_name(FrontendType t) {
  switch (t) {
    case FrontendType::Direct: return "direct";
    case FrontendType::Reg32_3d: return "reg_32_3d";
    case FrontendType::Desc64: return "desc_64";
  }
  return "direct";
}

std::size_t SystemConfig::backends() const {
  for (const auto& m : midends) {
    if (const auto* d = std::get_if<MpDistSpec>(&m)) return d->ports;
  }
  return 1;
}

const MemoryPortConfig* SystemConfig::memory_for(std::string_view port) const {
  for (const auto& m : memory) {
    if (m.port == port) return &m;
  }
  return nullptr;
}

std::string SystemConfig::mem_preset() const {
  for (const auto& m : memory) {
    if (is_data_port(m.port)) return m.preset.value_or("custom");
  }
  return "custom";
}

std::vector<TransferSpec> workload_transfers(const SystemConfig& cfg) {
  auto out = cfg.workload.transfers;
  if (const auto& f = cfg.workload.fragmented) {
    if (f->piece_bytes == 0) fail(Errc::InvalidArgument, "piece_bytes must be nonzero");
    if (f->total_bytes % f->piece_bytes != 0) {
      fail(Errc::IndivisibleTotal, "total_bytes is not a multiple of piece_bytes");
    }
    const auto n = f->total_bytes / f->piece_bytes;
    const TransferDescriptor1D base{f->src, f->dst, f->piece_bytes, f->src_protocol,
                                    f->dst_protocol, f->options};
    if (f->as_nd) {
      const auto stride = static_cast<std::int64_t>(f->piece_bytes);
      out.push_back({{base, {{stride, stride, n}}}, 0});
    } else {
      for (std::uint64_t i = 0; i < n; ++i) {
        auto d = base;
        d.src_addr += i * f->piece_bytes;
        d.dst_addr += i * f->piece_bytes;
        out.push_back({as_nd(d), 0});
      }
    }
  }
  return out;
}

void check_system(const SystemConfig& cfg) {
  const auto engine = require_valid(cfg.engine);
  std::set<std::string> seen;
  for (const auto& m : cfg.memory) {
    if (!seen.insert(m.port).second) fail(Errc::DuplicatePort, "two memories for port " + m.port);
    if (!is_data_port(m.port)) continue;
    const auto p = parse_protocol(m.port);
    if (!p) fail(Errc::UnknownProtocol, "unknown memory port " + m.port);
    if (*p == ProtocolId::Init) fail(Errc::ConfigError, "the init port has no memory");
    const bool present = std::any_of(engine->ports.begin(), engine->ports.end(),
                                     [&](const PortSpec& s) { return s.protocol == *p; });
    if (!present) fail(Errc::ConfigError, "memory for port " + m.port + " the engine lacks");
    if (m.model.max_outstanding == 0) fail(Errc::ZeroCapacity, "memory with no outstanding slots");
  }
  for (const auto& s : engine->ports) {
    if (s.protocol != ProtocolId::Init && !cfg.memory_for(protocol_name(s.protocol))) {
      fail(Errc::ConfigError,
           "no memory bound to port " + std::string(protocol_name(s.protocol)));
    }
  }
  bool expander = false;
  std::size_t dists = 0;
  for (std::size_t i = 0; i < cfg.midends.size(); ++i) {
    const auto& m = cfg.midends[i];
    expander = expander || is_expander(m);
    if (const auto* d = std::get_if<MpDistSpec>(&m)) {
      ++dists;
      if (i + 1 != cfg.midends.size()) fail(Errc::ConfigError, "mp_dist must end the chain");
      if (d->ports == 0) fail(Errc::ConfigError, "mp_dist needs at least one port");
    }
    if (const auto* r = std::get_if<Rt3dSpec>(&m)) {
      if (r->rt.enabled && !r->rt.num_launches && !cfg.sim.max_cycles) {
        fail(Errc::ConfigError, "unbounded rt_3d launches need sim.max_cycles");
      }
      if (r->rt.period == 0) fail(Errc::InvalidArgument, "rt period must be nonzero");
    }
  }
  if (dists > 1) fail(Errc::ConfigError, "at most one mp_dist");
  const auto work = workload_transfers(cfg);
  for (const auto& t : work) {
    if (!t.desc.dims.empty() && !expander) {
      fail(Errc::ConfigError, "ND transfers need a tensor mid-end");
    }
  }
  if (cfg.frontend.type == FrontendType::Desc64) {
    if (!cfg.memory_for("desc")) fail(Errc::ConfigError, "desc_64 needs a \"desc\" memory");
    for (const auto& t : work) {
      if (!t.desc.dims.empty()) fail(Errc::ConfigError, "desc_64 launches 1D transfers only");
    }
  }
  if (cfg.frontend.type == FrontendType::Reg32_3d) {
    constexpr std::uint64_t k32 = std::numeric_limits<std::uint32_t>::max();
    for (const auto& t : work) {
      const auto& b = t.desc.base;
      if (b.src_addr > k32 || b.dst_addr > k32 || b.length > k32) {
        fail(Errc::ConfigError, "reg_32_3d registers hold 32-bit values");
      }
      if (t.desc.dims.size() > 2) fail(Errc::ConfigError, "reg_32_3d has two outer dimensions");
      for (const auto& d : t.desc.dims) {
        constexpr auto lo = std::numeric_limits<std::int32_t>::min();
        constexpr auto hi = std::numeric_limits<std::int32_t>::max();
        if (d.src_stride < lo || d.src_stride > hi || d.dst_stride < lo || d.dst_stride > hi ||
            d.reps > k32) {
          fail(Errc::ConfigError, "reg_32_3d strides and repetitions are 32-bit");
        }
      }
    }
  }
}

SimResult simulate(const SystemConfig& cfg, const SimHooks& hooks) {
  check_system(cfg);
  const auto engine = require_valid(cfg.engine);
  const auto work = workload_transfers(cfg);
  SimResult result;
  auto& report = result.report;
  report.dw = engine->dw;
  std::vector<TraceEvent>* trace = hooks.trace ? &report.trace : nullptr;

  Cycle max_latency = 1;
  for (const auto& m : cfg.memory) {
    result.memories[m.port] = std::make_shared<MemoryStore>(m.model.base, m.model.size);
    max_latency = std::max(max_latency, m.model.latency);
  }

  // Source data.
  std::mt19937_64 rng(cfg.sim.seed);
  auto store_of = [&](ProtocolId p) -> MemoryStore* {
    auto it = result.memories.find(std::string(protocol_name(p)));
    return it == result.memories.end() ? nullptr : it->second.get();
  };
  for (const auto& t : work) {
    auto* mem = store_of(t.desc.base.src_protocol);
    if (!mem || t.desc.base.length == 0) continue;
    NdIterator it(t.desc);
    while (!it.done()) {
      const auto p = it.next();
      fill_range(*mem, p.src_addr, p.length, cfg.workload.fill, rng);
    }
  }
  for (const auto& t : work) {
    std::vector<std::uint8_t> src;
    NdIterator it(t.desc);
    while (!it.done()) {
      const auto p = it.next();
      std::vector<std::uint8_t> piece;
      if (auto* mem = store_of(p.src_protocol)) {
        piece = mem->read_range(p.src_addr, p.length);
      } else {
        piece = init_read(p.options.init, p.length);
      }
      src.insert(src.end(), piece.begin(), piece.end());
    }
    result.sources.push_back(std::move(src));
  }

  // Front-end.
  std::unique_ptr<FrontendSim> fe;
  switch (cfg.frontend.type) {
    case FrontendType::Direct:
      fe = std::make_unique<DirectFrontend>(work, cfg.frontend.launch_cycles);
      break;
    case FrontendType::Reg32_3d:
      fe = std::make_unique<RegFrontend>(work);
      break;
    case FrontendType::Desc64: {
      const auto* m = cfg.memory_for("desc");
      auto model = m->model;
      model.width = engine->dw;
      auto store = result.memories.at("desc");
      std::vector<Descriptor64> chain;
      for (const auto& t : work) {
        const auto& b = t.desc.base;
        Descriptor64 d;
        d.backend_config = encode_backend_config(
            {b.src_protocol, b.dst_protocol, b.options.error_action_default});
        d.length = b.length;
        d.src_addr = b.src_addr;
        d.dst_addr = b.dst_addr;
        chain.push_back(d);
      }
      const Addr head = build_chain(*store, cfg.frontend.desc_base, chain);
      const BackendOptions defaults = work.empty() ? BackendOptions{} : work.front().desc.base.options;
      fe = std::make_unique<DescFrontend>(cfg.frontend, std::make_unique<Endpoint>(model, store),
                                          head, defaults, trace);
      break;
    }
  }

  // Mid-ends and queues: queue i feeds stage i; the last queues feed back-ends.
  const std::size_t n_be = cfg.backends();
  std::vector<std::unique_ptr<StageSim>> stages;
  for (const auto& m : cfg.midends) stages.push_back(make_stage(m, engine->aw));
  std::vector<Queue> entry(1);
  std::vector<std::vector<Queue>> outs(stages.size());
  for (std::size_t i = 0; i < stages.size(); ++i) {
    outs[i].resize(std::holds_alternative<MpDistSpec>(cfg.midends[i]) ? n_be : 1);
  }
  auto input_of = [&](std::size_t i) -> Queue& { return i == 0 ? entry[0] : outs[i - 1][0]; };
  std::vector<Queue>& be_queues = stages.empty() ? entry : outs.back();

  // Back-ends, each with its own endpoints over the shared stores.
  std::vector<std::vector<std::unique_ptr<Endpoint>>> endpoints(n_be);
  std::vector<std::unique_ptr<Backend>> backends;
  for (std::size_t b = 0; b < n_be; ++b) {
    std::map<ProtocolId, Endpoint*> eps;
    for (const auto& m : cfg.memory) {
      if (!is_data_port(m.port)) continue;
      auto model = m.model;
      model.width = engine->dw;
      endpoints[b].push_back(std::make_unique<Endpoint>(model, result.memories.at(m.port)));
      eps[*parse_protocol(m.port)] = endpoints[b].back().get();
    }
    BackendParams params;
    params.index = b;
    params.error_decision_cycles = cfg.sim.error_decision_cycles;
    params.policy = hooks.policy;
    params.transform = hooks.transform;
    params.trace = trace;
    backends.push_back(std::make_unique<Backend>(engine, std::move(eps), std::move(params)));
  }

  Launches launches(trace);
  const Cycle patience = 10 * max_latency;
  Cycle now = 0;
  Cycle stalled = 0;
  for (;;) {
    bool moved = fe->step(now, entry[0], launches);
    for (std::size_t i = 0; i < stages.size(); ++i) {
      moved = stages[i]->step(now, input_of(i), outs[i], launches) || moved;
    }
    for (std::size_t b = 0; b < n_be; ++b) {
      auto& be = *backends[b];
      be.step(now);
      auto& q = be_queues[b];
      if (!q.empty() && q.front().avail <= now && be.can_accept()) {
        const auto& item = q.front();
        be.accept({item.launch_id, item.desc.base, launches.launch_cycle(item.launch_id),
                   item.avail},
                  now);
        q.pop_front();
        moved = true;
      }
      if (be.last_progress() == now) moved = true;
      for (const auto& [id, c] : be.take_first_reads()) launches.first_read(id, c);
      for (const auto& c : be.take_completions()) {
        if (!c.failed) report.payload_bytes += c.length;
        if (launches.complete(c.launch_id, c.cycle, c.failed)) fe->completed(c.launch_id);
      }
      auto sk = be.take_skipped();
      report.skipped.insert(report.skipped.end(), sk.begin(), sk.end());
    }

    const bool queues_empty =
        entry[0].empty() && std::all_of(outs.begin(), outs.end(), [](const auto& v) {
          return std::all_of(v.begin(), v.end(), [](const Queue& q) { return q.empty(); });
        });
    const bool finished =
        fe->done() && queues_empty && launches.all_done() &&
        std::all_of(stages.begin(), stages.end(), [](const auto& s) { return s->idle(); }) &&
        std::all_of(backends.begin(), backends.end(), [](const auto& b) { return b->idle(); });
    if (finished) break;
    if (cfg.sim.max_cycles && now + 1 >= *cfg.sim.max_cycles) break;

    if (moved) {
      stalled = 0;
      ++now;
      continue;
    }
    std::optional<Cycle> next = fe->wakeup(now);
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (auto w = stages[i]->wakeup(now, input_of(i), outs[i])) wake(next, *w);
    }
    for (std::size_t b = 0; b < n_be; ++b) {
      if (auto w = backends[b]->next_wakeup(now)) wake(next, *w);
      const auto& q = be_queues[b];
      if (!q.empty() && backends[b]->can_accept()) wake(next, std::max(now + 1, q.front().avail));
    }
    if (!next) fail(Errc::Deadlock, "no unit can make progress at cycle " + std::to_string(now));
    if (*next > now + 1) {
      now = *next;
      stalled = 0;
      continue;
    }
    if (++stalled > patience) {
      fail(Errc::Deadlock, "no progress for " + std::to_string(patience) + " cycles at cycle " +
                               std::to_string(now));
    }
    ++now;
  }

  report.total_cycles = now + 1;
  report.n_backends = n_be;
  for (const auto& be : backends) {
    report.ports.insert(report.ports.end(), be->stats().begin(), be->stats().end());
  }
  fe->collect(report.ports);
  report.launches = launches.take();
  for (const auto& l : report.launches) report.failures += l.failed ? 1 : 0;
  return result;
}

void apply_param(SystemConfig& cfg, std::string_view name, std::string_view value) {
  auto& e = cfg.engine;
  auto fragmented = [&]() -> FragmentedCopy& {
    if (!cfg.workload.fragmented) {
      fail(Errc::ConfigError, std::string(name) + " needs a fragmented_copy workload");
    }
    return *cfg.workload.fragmented;
  };
  if (name == "nax") {
    e.nax_read = e.nax_write = parse_uint(name, value);
  } else if (name == "nax_read") {
    e.nax_read = parse_uint(name, value);
  } else if (name == "nax_write") {
    e.nax_write = parse_uint(name, value);
  } else if (name == "dw") {
    e.dw = parse_uint(name, value);
  } else if (name == "aw") {
    e.aw = parse_uint(name, value);
  } else if (name == "buffer_depth") {
    e.buffer_depth = parse_uint(name, value);
  } else if (name == "piece_bytes") {
    fragmented().piece_bytes = parse_u64(name, value);
  } else if (name == "total_bytes") {
    fragmented().total_bytes = parse_u64(name, value);
  } else if (name == "latency" || name == "max_outstanding" || name == "preset") {
    for (auto& m : cfg.memory) {
      if (!is_data_port(m.port)) continue;
      if (name == "latency") {
        m.model.latency = parse_u64(name, value);
        m.preset.reset();
      } else if (name == "max_outstanding") {
        m.model.max_outstanding = parse_uint(name, value);
        m.preset.reset();
      } else {
        const auto p = preset(value);
        m.model.latency = p.latency;
        m.model.max_outstanding = p.max_outstanding;
        m.preset = std::string(value);
      }
    }
  } else {
    fail(Errc::ConfigError, "unknown sweep parameter " + std::string(name));
  }
}

SweepRow sweep_row(const SystemConfig& cfg, const SimReport& r) {
  SweepRow row;
  row.config_id = cfg.id;
  row.dw = cfg.engine.dw;
  row.aw = cfg.engine.aw;
  row.nax = std::max(cfg.engine.nax_read, cfg.engine.nax_write);
  row.mem_preset = cfg.mem_preset();
  const auto work = workload_transfers(cfg);
  if (const auto& f = cfg.workload.fragmented) {
    row.piece_bytes = f->piece_bytes;
    row.total_bytes = f->total_bytes;
  } else {
    row.piece_bytes = work.empty() ? 0 : work.front().desc.base.length;
    for (const auto& t : work) row.total_bytes += t.desc.total_bytes();
  }
  row.cycles = r.total_cycles;
  if (!work.empty()) {
    const auto port = protocol_name(work.front().desc.base.src_protocol);
    if (r.n_backends > 1) {
      row.util = aggregate_utilization(r, port);
    } else if (r.has_port(port) && r.port(port).first_request) {
      row.util = utilization(r, port);
    }
  }
  row.launch_latency = r.launch_latency(0).value_or(0);
  row.failures = r.failures;
  return row;
}

}  // namespace idma
