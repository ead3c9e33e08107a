// SPDX-License-Identifier: Apache-2.0
#include "idma/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace idma {

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string hex(Addr a) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(a));
  return buf;
}

}  // namespace

void PortStats::request(Cycle c) {
  if (!first_request || c < *first_request) first_request = c;
}

void PortStats::response(Cycle c) {
  if (!last_response || c > *last_response) last_response = c;
}

const PortStats& SimReport::port(std::string_view name, std::size_t backend) const {
  for (const auto& p : ports) {
    if (p.name == name && p.backend == backend) return p;
  }
  fail(Errc::InvalidArgument, "no port '" + std::string(name) + "' on back-end " +
                                  std::to_string(backend));
}

bool SimReport::has_port(std::string_view name, std::size_t backend) const {
  return std::any_of(ports.begin(), ports.end(),
                     [&](const PortStats& p) { return p.name == name && p.backend == backend; });
}

std::uint64_t SimReport::data_beats(Side side) const {
  std::uint64_t n = 0;
  for (const auto& p : ports) {
    if (p.name == "desc") continue;
    n += side == Side::Read ? p.read_beats : p.write_beats;
  }
  return n;
}

std::optional<Cycle> SimReport::launch_latency(std::size_t launch_index) const {
  if (launch_index >= launches.size()) return std::nullopt;
  const auto& l = launches[launch_index];
  if (!l.first_read) return std::nullopt;
  return *l.first_read - l.launch;
}

double utilization(const PortStats& p) {
  if (!p.first_request || !p.last_response || *p.last_response < *p.first_request) {
    fail(Errc::EmptyWindow, "port '" + p.name + "' has an empty activity window");
  }
  const auto window = *p.last_response - *p.first_request + 1;
  return static_cast<double>(p.payload_bytes) /
         (static_cast<double>(window) * static_cast<double>(p.bus_bytes));
}

double utilization(const SimReport& r, std::string_view port, std::size_t backend) {
  return utilization(r.port(port, backend));
}

double aggregate_utilization(const SimReport& r, std::string_view port) {
  std::optional<Cycle> lo, hi;
  std::uint64_t payload = 0;
  std::size_t n = 0;
  unsigned bw = 0;
  for (const auto& p : r.ports) {
    if (p.name != port) continue;
    ++n;
    bw = p.bus_bytes;
    payload += p.payload_bytes;
    if (p.first_request) lo = lo ? std::min(*lo, *p.first_request) : *p.first_request;
    if (p.last_response) hi = hi ? std::max(*hi, *p.last_response) : *p.last_response;
  }
  if (n == 0 || !lo || !hi || *hi < *lo) {
    fail(Errc::EmptyWindow, "no activity on port '" + std::string(port) + "'");
  }
  return static_cast<double>(payload) /
         (static_cast<double>(*hi - *lo + 1) * static_cast<double>(n) * bw);
}

double utilization_from_trace(const std::vector<TraceEvent>& trace, std::string_view unit,
                              std::string_view port, unsigned bus_bytes) {
  std::optional<Cycle> lo, hi;
  std::uint64_t payload = 0;
  for (const auto& e : trace) {
    if (e.unit != unit || e.port != port) continue;
    if (e.event == "ar" || e.event == "aw") lo = lo ? std::min(*lo, e.cycle) : e.cycle;
    if (e.event == "r_last" || e.event == "b") hi = hi ? std::max(*hi, e.cycle) : e.cycle;
    if (e.event == "payload") payload += e.length;
  }
  if (!lo || !hi || *hi < *lo) fail(Errc::EmptyWindow, "trace holds no activity for the port");
  return static_cast<double>(payload) / (static_cast<double>(*hi - *lo + 1) * bus_bytes);
}

std::string emit_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << r.config_id << ',' << r.dw << ',' << r.aw << ',' << r.nax << ',' << r.mem_preset << ','
       << r.piece_bytes << ',' << r.total_bytes << ',' << r.cycles << ',' << fixed(r.util) << ','
       << r.launch_latency << ',' << r.failures << '\n';
  }
  return os.str();
}

nlohmann::json rows_json(const std::vector<SweepRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"config_id", r.config_id},
                   {"dw", r.dw},
                   {"aw", r.aw},
                   {"nax", r.nax},
                   {"mem_preset", r.mem_preset},
                   {"piece_bytes", r.piece_bytes},
                   {"total_bytes", r.total_bytes},
                   {"cycles", r.cycles},
                   {"util", r.util},
                   {"launch_latency", r.launch_latency},
                   {"failures", r.failures}});
  }
  return out;
}

std::string trace_csv(const std::vector<TraceEvent>& trace) {
  std::ostringstream os;
  os << kTraceHeader << '\n';
  for (const auto& e : trace) {
    os << e.cycle << ',' << e.unit << ',' << e.event << ',' << hex(e.addr) << ',' << e.length << ','
       << e.port << '\n';
  }
  return os.str();
}

nlohmann::json report_json(const SimReport& r) {
  nlohmann::json j;
  j["total_cycles"] = r.total_cycles;
  j["dw"] = r.dw;
  j["n_backends"] = r.n_backends;
  j["payload_bytes"] = r.payload_bytes;
  j["failures"] = r.failures;
  auto ports = nlohmann::json::array();
  for (const auto& p : r.ports) {
    nlohmann::json pj{{"name", p.name},
                      {"backend", p.backend},
                      {"read_beats", p.read_beats},
                      {"write_beats", p.write_beats},
                      {"read_bursts", p.read_bursts},
                      {"write_bursts", p.write_bursts},
                      {"payload_bytes", p.payload_bytes}};
    if (p.first_request && p.last_response && *p.last_response >= *p.first_request) {
      pj["first_request"] = *p.first_request;
      pj["last_response"] = *p.last_response;
      pj["utilization"] = utilization(p);
    }
    ports.push_back(std::move(pj));
  }
  j["ports"] = std::move(ports);
  auto launches = nlohmann::json::array();
  for (const auto& l : r.launches) {
    nlohmann::json lj{{"id", l.id}, {"launch", l.launch}, {"bytes", l.bytes}, {"failed", l.failed}};
    if (l.first_read) lj["latency"] = *l.first_read - l.launch;
    if (l.completion) lj["completion"] = *l.completion;
    launches.push_back(std::move(lj));
  }
  j["launches"] = std::move(launches);
  auto skipped = nlohmann::json::array();
  for (const auto& s : r.skipped) {
    skipped.push_back({{"launch_id", s.launch_id},
                       {"dst_addr", s.dst_addr},
                       {"length", s.length},
                       {"side", side_name(s.side)}});
  }
  j["skipped"] = std::move(skipped);
  return j;
}

std::string report_csv(const SimReport& r) {
  std::ostringstream os;
  os << "backend,port,read_beats,write_beats,payload_bytes,first_request,last_response,util\n";
  for (const auto& p : r.ports) {
    os << p.backend << ',' << p.name << ',' << p.read_beats << ',' << p.write_beats << ','
       << p.payload_bytes << ',';
    if (p.first_request && p.last_response && *p.last_response >= *p.first_request) {
      os << *p.first_request << ',' << *p.last_response << ',' << fixed(utilization(p));
    } else {
      os << ",,";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace idma
