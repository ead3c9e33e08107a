// SPDX-License-Identifier: Apache-2.0
//
// Simulation reports, utilization figures, and CSV/JSON emitters.
//
// Port utilization = payload bytes / (window cycles * bus bytes), where the
// window runs from the port's first request (AR or AW) to its last response
// (final read beat or write acknowledgment), both inclusive.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "idma/core.hpp"

namespace idma {

struct TraceEvent {
  Cycle cycle = 0;
  std::string unit;   // "be0", "fe", "desc", ...
  std::string event;  // launch, ar, aw, r_last, b, payload, error, replay, abort, skip
  Addr addr = 0;
  std::uint64_t length = 0;
  std::string port;

  bool operator==(const TraceEvent&) const = default;
};

struct PortStats {
  std::string name;
  std::size_t backend = 0;
  unsigned bus_bytes = 4;
  std::uint64_t read_beats = 0;
  std::uint64_t write_beats = 0;
  std::uint64_t read_bursts = 0;
  std::uint64_t write_bursts = 0;
  std::uint64_t payload_bytes = 0;
  std::optional<Cycle> first_request;
  std::optional<Cycle> last_response;

  void request(Cycle c);
  void response(Cycle c);
  bool operator==(const PortStats&) const = default;
};

struct LaunchRecord {
  std::uint64_t id = 0;
  Cycle launch = 0;
  std::optional<Cycle> first_read;
  std::optional<Cycle> completion;
  std::uint64_t bytes = 0;
  bool failed = false;

  bool operator==(const LaunchRecord&) const = default;
};

struct SkippedRange {
  std::uint64_t launch_id = 0;
  Addr dst_addr = 0;
  std::uint64_t length = 0;
  Side side = Side::Read;  // channel on which the error surfaced

  bool operator==(const SkippedRange&) const = default;
};

struct SimReport {
  Cycle total_cycles = 0;
  unsigned dw = 32;
  std::size_t n_backends = 1;
  std::uint64_t payload_bytes = 0;
  std::uint64_t failures = 0;
  std::vector<PortStats> ports;
  std::vector<LaunchRecord> launches;
  std::vector<SkippedRange> skipped;
  std::vector<TraceEvent> trace;

  // InvalidArgument when absent.
  const PortStats& port(std::string_view name, std::size_t backend = 0) const;
  bool has_port(std::string_view name, std::size_t backend = 0) const;
  std::uint64_t data_beats(Side side) const;  // over all data ports
  std::optional<Cycle> launch_latency(std::size_t launch_index = 0) const;

  bool operator==(const SimReport&) const = default;
};

// EmptyWindow when the port saw no request.
double utilization(const PortStats& p);
double utilization(const SimReport& r, std::string_view port, std::size_t backend = 0);

// Payload of all back-ends' `port` ports over the union window, normalized by
// the number of back-ends.
double aggregate_utilization(const SimReport& r, std::string_view port);

// Recomputes a port's utilization from trace events alone.
double utilization_from_trace(const std::vector<TraceEvent>& trace, std::string_view unit,
                              std::string_view port, unsigned bus_bytes);

struct SweepRow {
  std::string config_id;
  unsigned dw = 0;
  unsigned aw = 0;
  unsigned nax = 0;
  std::string mem_preset;
  std::uint64_t piece_bytes = 0;
  std::uint64_t total_bytes = 0;
  Cycle cycles = 0;
  double util = 0.0;
  Cycle launch_latency = 0;
  std::uint64_t failures = 0;

  bool operator==(const SweepRow&) const = default;
};

inline constexpr std::string_view kSweepHeader =
    "config_id,dw,aw,nax,mem_preset,piece_bytes,total_bytes,cycles,util,launch_latency,failures";

std::string emit_csv(const std::vector<SweepRow>& rows);
nlohmann::json rows_json(const std::vector<SweepRow>& rows);

inline constexpr std::string_view kTraceHeader = "cycle,unit,event,address,length,port";
std::string trace_csv(const std::vector<TraceEvent>& trace);

nlohmann::json report_json(const SimReport& r);
std::string report_csv(const SimReport& r);

}  // namespace idma
