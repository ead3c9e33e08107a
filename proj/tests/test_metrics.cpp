// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "idma/metrics.hpp"

using namespace idma;
using fixture::copy;

TEST_CASE("utilization over the active window") {
  PortStats p;
  p.bus_bytes = 8;
  try {
    utilization(p);
    FAIL("expected EmptyWindow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyWindow);
  }
  p.request(10);
  p.response(19);
  p.payload_bytes = 40;
  CHECK(utilization(p) == Catch::Approx(0.5));
  p.request(4);
  p.response(12);
  CHECK(p.first_request == 4u);
  CHECK(p.last_response == 19u);
}

TEST_CASE("trace-derived utilization agrees with the counters") {
  auto c = fixture::copy_system(ProtocolId::Axi, ProtocolId::Obi, 32, 4);
  c.workload.transfers = {copy(0x13, 0x100, 3000, ProtocolId::Axi, ProtocolId::Obi),
                          copy(0x2000, 0x4000, 100, ProtocolId::Axi, ProtocolId::Obi)};
  SimHooks h;
  h.trace = true;
  const auto r = simulate(c, h).report;
  for (const char* port : {"axi", "obi"}) {
    CHECK(utilization_from_trace(r.trace, "be0", port, 4) == Catch::Approx(utilization(r, port)));
  }
  CHECK(r.data_beats(Side::Read) == r.port("axi").read_beats);
  CHECK(r.port("obi").write_beats == r.data_beats(Side::Write));
  CHECK_THROWS_AS(r.port("tilelink_uh"), Error);
  CHECK(r.launches.size() == 2);
  CHECK(r.launches[1].completion.has_value());
}

TEST_CASE("aggregate utilization normalizes by back-ends") {
  SimReport r;
  r.n_backends = 2;
  for (std::size_t b = 0; b < 2; ++b) {
    PortStats p;
    p.name = "axi";
    p.backend = b;
    p.bus_bytes = 4;
    p.request(0);
    p.response(9);
    p.payload_bytes = 40;
    r.ports.push_back(p);
  }
  CHECK(aggregate_utilization(r, "axi") == Catch::Approx(1.0));
  r.ports[1].payload_bytes = 0;
  CHECK(aggregate_utilization(r, "axi") == Catch::Approx(0.5));
}

TEST_CASE("CSV emitters have fixed headers") {
  SweepRow row;
  row.config_id = "x";
  row.dw = 32;
  row.util = 0.5;
  const auto csv = emit_csv({row, row});
  CHECK(csv.rfind(std::string(kSweepHeader) + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const auto j = rows_json({row});
  CHECK(j.at(0).at("config_id") == "x");

  std::vector<TraceEvent> ev{{3, "be0", "ar", 0x40, 16, "axi"}};
  const auto t = trace_csv(ev);
  CHECK(t.rfind(std::string(kTraceHeader) + "\n", 0) == 0);
  CHECK(t.find("3,be0,ar,") != std::string::npos);
}

TEST_CASE("report JSON carries totals") {
  auto c = fixture::copy_system(ProtocolId::Axi, ProtocolId::Axi);
  c.workload.transfers = {copy(0, 0x1000, 64)};
  const auto r = simulate(c).report;
  const auto j = report_json(r);
  CHECK(j.at("total_cycles") == r.total_cycles);
  CHECK(j.at("payload_bytes") == 64);
  CHECK_FALSE(report_csv(r).empty());
}
