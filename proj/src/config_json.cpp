// SPDX-License-Identifier: Apache-2.0
#include "idma/config_json.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace idma {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(Errc::ConfigError, where + ": " + what);
}

void only_keys(const json& j, const std::string& where,
               std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      bad(where, "unknown key \"" + k + "\"");
    }
  }
}

// Unsigned integer given as a number or as a "0x..." / decimal string.
std::uint64_t to_u64(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto x = v.get<std::int64_t>();
    if (x < 0) bad(where, "must not be negative");
    return static_cast<std::uint64_t>(x);
  }
  if (v.is_string()) {
    std::string_view s = v.get_ref<const std::string&>();
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      s.remove_prefix(2);
      base = 16;
    }
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
    if (ec == std::errc{} && p == s.data() + s.size() && !s.empty()) return out;
  }
  bad(where, "expected an unsigned integer");
}

std::int64_t to_i64(const json& v, const std::string& where) {
  if (v.is_number_integer()) {
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      bad(where, "out of range");
    }
    return v.get<std::int64_t>();
  }
  bad(where, "expected an integer");
}

unsigned to_uint(const json& v, const std::string& where) {
  const auto x = to_u64(v, where);
  if (x > 0xFFFFFFFFull) bad(where, "out of range");
  return static_cast<unsigned>(x);
}

bool to_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) bad(where, "expected true or false");
  return v.get<bool>();
}

std::string to_str(const json& v, const std::string& where) {
  if (!v.is_string()) bad(where, "expected a string");
  return v.get<std::string>();
}

ProtocolId to_protocol(const json& v, const std::string& where) {
  const auto s = to_str(v, where);
  const auto p = parse_protocol(s);
  if (!p) fail(Errc::UnknownProtocol, where + ": unknown protocol \"" + s + "\"");
  return *p;
}

Side to_side(const json& v, const std::string& where) {
  const auto s = to_str(v, where);
  if (s == "read") return Side::Read;
  if (s == "write") return Side::Write;
  bad(where, "expected \"read\" or \"write\"");
}

SplitSide to_split_side(const json& v, const std::string& where) {
  const auto s = to_str(v, where);
  if (s == "src") return SplitSide::Src;
  if (s == "dst") return SplitSide::Dst;
  bad(where, "expected \"src\" or \"dst\"");
}

std::string_view split_side_name(SplitSide s) { return s == SplitSide::Src ? "src" : "dst"; }

template <class F>
void opt(const json& j, const char* key, const std::string& where, F&& f) {
  if (auto it = j.find(key); it != j.end()) f(*it, where + "." + key);
}

const json& req(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing \"") + key + "\"");
  return *it;
}

constexpr std::string_view kInitKinds[] = {"constant", "increment", "pseudorandom"};

BackendOptions options_from(const json& j, const std::string& where) {
  only_keys(j, where, {"decouple_rw", "burst_cap", "src_reduce_len", "dst_reduce_len",
                       "error_action", "init"});
  BackendOptions o;
  opt(j, "decouple_rw", where, [&](const json& v, const std::string& w) { o.decouple_rw = to_bool(v, w); });
  opt(j, "burst_cap", where, [&](const json& v, const std::string& w) { o.user_burst_cap = to_u64(v, w); });
  opt(j, "src_reduce_len", where, [&](const json& v, const std::string& w) { o.src_reduce_len = to_uint(v, w); });
  opt(j, "dst_reduce_len", where, [&](const json& v, const std::string& w) { o.dst_reduce_len = to_uint(v, w); });
  opt(j, "error_action", where, [&](const json& v, const std::string& w) {
    const auto a = parse_error_action(to_str(v, w));
    if (!a) bad(w, "expected continue, abort or replay");
    o.error_action_default = *a;
  });
  opt(j, "init", where, [&](const json& v, const std::string& w) {
    only_keys(v, w, {"kind", "value"});
    opt(v, "kind", w, [&](const json& k, const std::string& wk) {
      const auto s = to_str(k, wk);
      const auto it = std::find(std::begin(kInitKinds), std::end(kInitKinds), s);
      if (it == std::end(kInitKinds)) bad(wk, "unknown init pattern \"" + s + "\"");
      o.init.kind = static_cast<InitPattern::Kind>(it - std::begin(kInitKinds));
    });
    opt(v, "value", w, [&](const json& x, const std::string& wx) { o.init.value = to_u64(x, wx); });
  });
  return o;
}

json options_to(const BackendOptions& o) {
  json j;
  j["decouple_rw"] = o.decouple_rw;
  if (o.user_burst_cap) j["burst_cap"] = *o.user_burst_cap;
  if (o.src_reduce_len) j["src_reduce_len"] = *o.src_reduce_len;
  if (o.dst_reduce_len) j["dst_reduce_len"] = *o.dst_reduce_len;
  j["error_action"] = error_action_name(o.error_action_default);
  j["init"] = {{"kind", kInitKinds[static_cast<int>(o.init.kind)]}, {"value", o.init.value}};
  return j;
}

NdTransferDescriptor transfer_at(const json& j, const std::string& where) {
  only_keys(j, where, {"src", "dst", "length", "src_protocol", "dst_protocol", "dims", "options", "at"});
  NdTransferDescriptor d;
  d.base.src_addr = to_u64(req(j, "src", where), where + ".src");
  d.base.dst_addr = to_u64(req(j, "dst", where), where + ".dst");
  d.base.length = to_u64(req(j, "length", where), where + ".length");
  opt(j, "src_protocol", where, [&](const json& v, const std::string& w) { d.base.src_protocol = to_protocol(v, w); });
  opt(j, "dst_protocol", where, [&](const json& v, const std::string& w) { d.base.dst_protocol = to_protocol(v, w); });
  opt(j, "options", where, [&](const json& v, const std::string& w) { d.base.options = options_from(v, w); });
  opt(j, "dims", where, [&](const json& v, const std::string& w) {
    if (!v.is_array()) bad(w, "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto wi = w + "[" + std::to_string(i) + "]";
      only_keys(v[i], wi, {"src_stride", "dst_stride", "reps"});
      Dimension dim;
      opt(v[i], "src_stride", wi, [&](const json& x, const std::string& wx) { dim.src_stride = to_i64(x, wx); });
      opt(v[i], "dst_stride", wi, [&](const json& x, const std::string& wx) { dim.dst_stride = to_i64(x, wx); });
      opt(v[i], "reps", wi, [&](const json& x, const std::string& wx) { dim.reps = to_u64(x, wx); });
      d.dims.push_back(dim);
    }
  });
  return d;
}

EngineConfig engine_at(const json& j, const std::string& where) {
  only_keys(j, where, {"aw", "dw", "nax", "nax_read", "nax_write", "ports", "has_legalizer",
                       "has_error_handler", "buffer_depth", "reject_zero_length"});
  EngineConfig c;
  opt(j, "aw", where, [&](const json& v, const std::string& w) { c.aw = to_uint(v, w); });
  opt(j, "dw", where, [&](const json& v, const std::string& w) { c.dw = to_uint(v, w); });
  opt(j, "nax", where, [&](const json& v, const std::string& w) { c.nax_read = c.nax_write = to_uint(v, w); });
  opt(j, "nax_read", where, [&](const json& v, const std::string& w) { c.nax_read = to_uint(v, w); });
  opt(j, "nax_write", where, [&](const json& v, const std::string& w) { c.nax_write = to_uint(v, w); });
  opt(j, "has_legalizer", where, [&](const json& v, const std::string& w) { c.has_legalizer = to_bool(v, w); });
  opt(j, "has_error_handler", where, [&](const json& v, const std::string& w) { c.has_error_handler = to_bool(v, w); });
  opt(j, "buffer_depth", where, [&](const json& v, const std::string& w) { c.buffer_depth = to_uint(v, w); });
  opt(j, "reject_zero_length", where, [&](const json& v, const std::string& w) { c.reject_zero_length = to_bool(v, w); });
  opt(j, "ports", where, [&](const json& v, const std::string& w) {
    if (!v.is_array()) bad(w, "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto wi = w + "[" + std::to_string(i) + "]";
      only_keys(v[i], wi, {"protocol", "direction"});
      PortSpec p;
      p.protocol = to_protocol(req(v[i], "protocol", wi), wi + ".protocol");
      opt(v[i], "direction", wi, [&](const json& x, const std::string& wx) {
        const auto d = parse_direction(to_str(x, wx));
        if (!d) bad(wx, "expected read, write or rw");
        p.direction = *d;
      });
      c.ports.push_back(p);
    }
  });
  return c;
}

ErrorRule rule_at(const json& j, const std::string& where) {
  only_keys(j, where, {"burst", "range", "side", "kind"});
  ErrorRule r;
  opt(j, "burst", where, [&](const json& v, const std::string& w) { r.burst = to_u64(v, w); });
  opt(j, "range", where, [&](const json& v, const std::string& w) {
    if (!v.is_array() || v.size() != 2) bad(w, "expected [begin, end]");
    r.range_begin = to_u64(v[0], w);
    r.range_end = to_u64(v[1], w);
  });
  opt(j, "side", where, [&](const json& v, const std::string& w) { r.side = to_side(v, w); });
  opt(j, "kind", where, [&](const json& v, const std::string& w) { r.kind = to_str(v, w); });
  if (!r.burst && !r.range_begin) bad(where, "error rule needs \"burst\" or \"range\"");
  return r;
}

MemoryPortConfig memory_at(const json& j, const std::string& where, unsigned dw) {
  only_keys(j, where, {"port", "preset", "latency", "max_outstanding", "size", "base", "errors"});
  MemoryPortConfig m;
  m.port = to_str(req(j, "port", where), where + ".port");
  opt(j, "preset", where, [&](const json& v, const std::string& w) {
    m.preset = to_str(v, w);
    m.model = preset(*m.preset);
  });
  opt(j, "latency", where, [&](const json& v, const std::string& w) { m.model.latency = to_u64(v, w); });
  opt(j, "max_outstanding", where, [&](const json& v, const std::string& w) { m.model.max_outstanding = to_uint(v, w); });
  opt(j, "size", where, [&](const json& v, const std::string& w) { m.model.size = to_u64(v, w); });
  opt(j, "base", where, [&](const json& v, const std::string& w) { m.model.base = to_u64(v, w); });
  opt(j, "errors", where, [&](const json& v, const std::string& w) {
    if (!v.is_array()) bad(w, "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      m.model.error_plan.push_back(rule_at(v[i], w + "[" + std::to_string(i) + "]"));
    }
  });
  m.model.width = dw;
  return m;
}

MidendSpec midend_at(const json& j, const std::string& where, unsigned /*aw*/) {
  const auto type = to_str(req(j, "type", where), where + ".type");
  if (type == "tensor_nd") {
    only_keys(j, where, {"type", "dims", "zero_latency"});
    TensorNdSpec s;
    opt(j, "dims", where, [&](const json& v, const std::string& w) { s.dims = to_uint(v, w); });
    opt(j, "zero_latency", where, [&](const json& v, const std::string& w) { s.zero_latency = to_bool(v, w); });
    return s;
  }
  if (type == "tensor_2d") {
    only_keys(j, where, {"type"});
    return Tensor2dSpec{};
  }
  if (type == "mp_split") {
    only_keys(j, where, {"type", "boundary", "side"});
    MpSplitSpec s;
    opt(j, "boundary", where, [&](const json& v, const std::string& w) { s.boundary = to_u64(v, w); });
    opt(j, "side", where, [&](const json& v, const std::string& w) { s.side = to_split_side(v, w); });
    return s;
  }
  if (type == "mp_dist") {
    only_keys(j, where, {"type", "ports", "boundary", "side", "policy"});
    MpDistSpec s;
    opt(j, "ports", where, [&](const json& v, const std::string& w) { s.ports = to_u64(v, w); });
    opt(j, "boundary", where, [&](const json& v, const std::string& w) { s.boundary = to_u64(v, w); });
    opt(j, "side", where, [&](const json& v, const std::string& w) { s.side = to_split_side(v, w); });
    opt(j, "policy", where, [&](const json& v, const std::string& w) {
      const auto p = to_str(v, w);
      if (p == "address") s.policy = DistPolicy::AddressModulo;
      else if (p == "round_robin") s.policy = DistPolicy::RoundRobin;
      else bad(w, "expected address or round_robin");
    });
    return s;
  }
  if (type == "rt_3d") {
    only_keys(j, where, {"type", "shape", "period", "num_launches", "enabled", "start"});
    Rt3dSpec s;
    s.rt.shape = transfer_at(req(j, "shape", where), where + ".shape");
    opt(j, "period", where, [&](const json& v, const std::string& w) { s.rt.period = to_u64(v, w); });
    opt(j, "num_launches", where, [&](const json& v, const std::string& w) { s.rt.num_launches = to_u64(v, w); });
    opt(j, "enabled", where, [&](const json& v, const std::string& w) { s.rt.enabled = to_bool(v, w); });
    opt(j, "start", where, [&](const json& v, const std::string& w) { s.rt.start = to_u64(v, w); });
    return s;
  }
  bad(where, "unknown mid-end \"" + type + "\"");
}

json midend_to(const MidendSpec& m) {
  json j;
  j["type"] = midend_name(m);
  if (const auto* s = std::get_if<TensorNdSpec>(&m)) {
    j["dims"] = s->dims;
    j["zero_latency"] = s->zero_latency;
  } else if (const auto* s = std::get_if<MpSplitSpec>(&m)) {
    j["boundary"] = s->boundary;
    j["side"] = split_side_name(s->side);
  } else if (const auto* s = std::get_if<MpDistSpec>(&m)) {
    j["ports"] = s->ports;
    j["boundary"] = s->boundary;
    j["side"] = split_side_name(s->side);
    j["policy"] = s->policy == DistPolicy::RoundRobin ? "round_robin" : "address";
  } else if (const auto* s = std::get_if<Rt3dSpec>(&m)) {
    j["shape"] = transfer_to_json(s->rt.shape);
    j["period"] = s->rt.period;
    if (s->rt.num_launches) j["num_launches"] = *s->rt.num_launches;
    j["enabled"] = s->rt.enabled;
    j["start"] = s->rt.start;
  }
  return j;
}

constexpr std::string_view kFills[] = {"random", "zero", "increment"};

WorkloadConfig workload_at(const json& j, const std::string& where) {
  only_keys(j, where, {"fill", "transfers", "fragmented_copy"});
  WorkloadConfig w;
  opt(j, "fill", where, [&](const json& v, const std::string& wh) {
    const auto s = to_str(v, wh);
    const auto it = std::find(std::begin(kFills), std::end(kFills), s);
    if (it == std::end(kFills)) bad(wh, "expected random, zero or increment");
    w.fill = static_cast<FillKind>(it - std::begin(kFills));
  });
  opt(j, "transfers", where, [&](const json& v, const std::string& wh) {
    if (!v.is_array()) bad(wh, "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto wi = wh + "[" + std::to_string(i) + "]";
      TransferSpec t;
      t.desc = transfer_at(v[i], wi);
      opt(v[i], "at", wi, [&](const json& x, const std::string& wx) { t.at = to_u64(x, wx); });
      w.transfers.push_back(std::move(t));
    }
  });
  opt(j, "fragmented_copy", where, [&](const json& v, const std::string& wh) {
    only_keys(v, wh, {"src", "dst", "total_bytes", "piece_bytes", "src_protocol", "dst_protocol",
                      "protocol", "as_nd", "options"});
    FragmentedCopy f;
    f.src = to_u64(req(v, "src", wh), wh + ".src");
    f.dst = to_u64(req(v, "dst", wh), wh + ".dst");
    f.total_bytes = to_u64(req(v, "total_bytes", wh), wh + ".total_bytes");
    f.piece_bytes = to_u64(req(v, "piece_bytes", wh), wh + ".piece_bytes");
    opt(v, "protocol", wh, [&](const json& x, const std::string& wx) {
      f.src_protocol = f.dst_protocol = to_protocol(x, wx);
    });
    opt(v, "src_protocol", wh, [&](const json& x, const std::string& wx) { f.src_protocol = to_protocol(x, wx); });
    opt(v, "dst_protocol", wh, [&](const json& x, const std::string& wx) { f.dst_protocol = to_protocol(x, wx); });
    opt(v, "as_nd", wh, [&](const json& x, const std::string& wx) { f.as_nd = to_bool(x, wx); });
    opt(v, "options", wh, [&](const json& x, const std::string& wx) { f.options = options_from(x, wx); });
    w.fragmented = f;
  });
  return w;
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, std::string("malformed configuration: ") + e.what());
  }
}

}  // namespace

EngineConfig engine_from_json(const json& j) {
  return guarded([&] { return engine_at(j, "engine"); });
}

json engine_to_json(const EngineConfig& c) {
  json ports = json::array();
  for (const auto& p : c.ports) {
    ports.push_back({{"protocol", protocol_name(p.protocol)}, {"direction", direction_name(p.direction)}});
  }
  return {{"aw", c.aw},
          {"dw", c.dw},
          {"nax_read", c.nax_read},
          {"nax_write", c.nax_write},
          {"ports", ports},
          {"has_legalizer", c.has_legalizer},
          {"has_error_handler", c.has_error_handler},
          {"buffer_depth", c.buffer_depth},
          {"reject_zero_length", c.reject_zero_length}};
}

NdTransferDescriptor transfer_from_json(const json& j) {
  return guarded([&] { return transfer_at(j, "transfer"); });
}

json transfer_to_json(const NdTransferDescriptor& d) {
  json j = {{"src", d.base.src_addr},
            {"dst", d.base.dst_addr},
            {"length", d.base.length},
            {"src_protocol", protocol_name(d.base.src_protocol)},
            {"dst_protocol", protocol_name(d.base.dst_protocol)},
            {"options", options_to(d.base.options)}};
  if (!d.dims.empty()) {
    json dims = json::array();
    for (const auto& dim : d.dims) {
      dims.push_back({{"src_stride", dim.src_stride}, {"dst_stride", dim.dst_stride}, {"reps", dim.reps}});
    }
    j["dims"] = dims;
  }
  return j;
}

SystemConfig system_from_json(const json& j) {
  return guarded([&] {
    only_keys(j, "config", {"id", "engine", "memory", "frontend", "midends", "workload", "sim"});
    SystemConfig c;
    opt(j, "id", "config", [&](const json& v, const std::string& w) { c.id = to_str(v, w); });
    c.engine = engine_at(req(j, "engine", "config"), "engine");
    opt(j, "memory", "config", [&](const json& v, const std::string& w) {
      if (!v.is_array()) bad(w, "expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) {
        c.memory.push_back(memory_at(v[i], "memory[" + std::to_string(i) + "]", c.engine.dw));
      }
    });
    opt(j, "frontend", "config", [&](const json& v, const std::string& w) {
      only_keys(v, w, {"type", "launch_cycles", "desc_base", "max_chain", "prefetch"});
      opt(v, "type", w, [&](const json& x, const std::string& wx) {
        const auto s = to_str(x, wx);
        if (s == "direct") c.frontend.type = FrontendType::Direct;
        else if (s == "reg_32_3d") c.frontend.type = FrontendType::Reg32_3d;
        else if (s == "desc_64") c.frontend.type = FrontendType::Desc64;
        else bad(wx, "unknown front-end \"" + s + "\"");
      });
      opt(v, "launch_cycles", w, [&](const json& x, const std::string& wx) { c.frontend.launch_cycles = to_u64(x, wx); });
      opt(v, "desc_base", w, [&](const json& x, const std::string& wx) { c.frontend.desc_base = to_u64(x, wx); });
      opt(v, "max_chain", w, [&](const json& x, const std::string& wx) { c.frontend.max_chain = to_u64(x, wx); });
      opt(v, "prefetch", w, [&](const json& x, const std::string& wx) { c.frontend.prefetch = to_u64(x, wx); });
    });
    opt(j, "midends", "config", [&](const json& v, const std::string& w) {
      if (!v.is_array()) bad(w, "expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) {
        c.midends.push_back(midend_at(v[i], "midends[" + std::to_string(i) + "]", c.engine.aw));
      }
    });
    opt(j, "workload", "config", [&](const json& v, const std::string& w) { c.workload = workload_at(v, w); });
    opt(j, "sim", "config", [&](const json& v, const std::string& w) {
      only_keys(v, w, {"seed", "error_decision_cycles", "max_cycles"});
      opt(v, "seed", w, [&](const json& x, const std::string& wx) { c.sim.seed = to_u64(x, wx); });
      opt(v, "error_decision_cycles", w, [&](const json& x, const std::string& wx) { c.sim.error_decision_cycles = to_u64(x, wx); });
      opt(v, "max_cycles", w, [&](const json& x, const std::string& wx) { c.sim.max_cycles = to_u64(x, wx); });
    });
    return c;
  });
}

json system_to_json(const SystemConfig& c) {
  json j;
  j["id"] = c.id;
  j["engine"] = engine_to_json(c.engine);
  json mem = json::array();
  for (const auto& m : c.memory) {
    json e = {{"port", m.port},
              {"latency", m.model.latency},
              {"max_outstanding", m.model.max_outstanding},
              {"size", m.model.size},
              {"base", m.model.base}};
    if (m.preset) e["preset"] = *m.preset;
    if (!m.model.error_plan.empty()) {
      json errs = json::array();
      for (const auto& r : m.model.error_plan) {
        json x = {{"side", side_name(r.side)}, {"kind", r.kind}};
        if (r.burst) x["burst"] = *r.burst;
        if (r.range_begin) x["range"] = {*r.range_begin, r.range_end.value_or(*r.range_begin)};
        errs.push_back(x);
      }
      e["errors"] = errs;
    }
    mem.push_back(e);
  }
  j["memory"] = mem;
  j["frontend"] = {{"type", frontend_name(c.frontend.type)},
                   {"launch_cycles", c.frontend.launch_cycles},
                   {"desc_base", c.frontend.desc_base},
                   {"max_chain", c.frontend.max_chain},
                   {"prefetch", c.frontend.prefetch}};
  json mids = json::array();
  for (const auto& m : c.midends) mids.push_back(midend_to(m));
  j["midends"] = mids;
  json work;
  work["fill"] = kFills[static_cast<int>(c.workload.fill)];
  json ts = json::array();
  for (const auto& t : c.workload.transfers) {
    auto x = transfer_to_json(t.desc);
    x["at"] = t.at;
    ts.push_back(x);
  }
  work["transfers"] = ts;
  if (const auto& f = c.workload.fragmented) {
    work["fragmented_copy"] = {{"src", f->src},
                               {"dst", f->dst},
                               {"total_bytes", f->total_bytes},
                               {"piece_bytes", f->piece_bytes},
                               {"src_protocol", protocol_name(f->src_protocol)},
                               {"dst_protocol", protocol_name(f->dst_protocol)},
                               {"as_nd", f->as_nd},
                               {"options", options_to(f->options)}};
  }
  j["workload"] = work;
  json sim = {{"seed", c.sim.seed}, {"error_decision_cycles", c.sim.error_decision_cycles}};
  if (c.sim.max_cycles) sim["max_cycles"] = *c.sim.max_cycles;
  j["sim"] = sim;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::ConfigError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, path + ": " + e.what());
  }
}

SystemConfig load_system(const std::string& path) { return system_from_json(read_json_file(path)); }

}  // namespace idma
