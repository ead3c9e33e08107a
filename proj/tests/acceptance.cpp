// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances are fixed below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "idma/config_json.hpp"
#include "idma/costmodel.hpp"
#include "idma/legalizer.hpp"
#include "idma/system.hpp"
#include "oracles.hpp"

using namespace idma;

namespace {

constexpr int kLegalizerCases = 10'000;
constexpr int kCopyCases = 1'000;
constexpr Cycle kPulpMaxCycles = 1107;
constexpr double kSramSmallUtil = 0.95;
constexpr double kHbmUtil = 0.90;
constexpr double kCheshireUtil = 0.90;
constexpr double kMempoolUtil = 0.99;
constexpr double kAreaLimitGe = 25'000;
constexpr double kMarginalGe = 400;
constexpr double kMarginalTol = 0.25;
constexpr int kNnlsTrials = 100;
constexpr double kNnlsNoise = 0.05;
constexpr double kNnlsMaxError = 0.09;
constexpr double kKktTol = 1e-9;
constexpr double kUtilEps = 1e-12;  // float slack on exact ceilings and orderings

std::string config(const char* name) { return std::string(IDMA_CONFIG_DIR) + "/" + name + ".json"; }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int n, const char* title, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str(), s);
  std::fflush(stdout);
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// 1 -------------------------------------------------------------------------
Outcome legalizer_coverage() {
  std::mt19937_64 rng(0xC0FFEE);
  const unsigned widths[] = {8, 16, 32, 64, 128, 256, 512};
  std::uint64_t violations = 0, bursts = 0;
  for (int i = 0; i < kLegalizerCases; ++i) {
    TransferDescriptor1D d;
    d.src_protocol = kAllProtocols[rng() % 7];
    do {
      d.dst_protocol = kAllProtocols[rng() % 7];
    } while (d.dst_protocol == ProtocolId::Init);
    const unsigned dw = widths[rng() % 7];
    d.src_addr = rng() % (1ull << 32);
    d.dst_addr = rng() % (1ull << 32);
    d.length = 1 + rng() % 65536;
    if (rng() % 4 == 0) d.options.user_burst_cap = (dw / 8) * (1 + rng() % 32);
    d.options.decouple_rw = rng() % 2;
    TransferLegalizer l(d, dw, true);
    for (Side side : {Side::Read, Side::Write}) {
      const auto p = side == Side::Read ? d.src_protocol : d.dst_protocol;
      Addr cursor = side == Side::Read ? d.src_addr : d.dst_addr;
      std::uint64_t left = d.length;
      std::vector<std::uint8_t> covered(d.length, 0);
      while (!l.done(side)) {
        const auto b = l.pop(side);
        ++bursts;
        const auto cap = side_cap(d.options, side, dw);
        if (b.addr != cursor || b.length == 0 || b.length > left) {
          ++violations;
          break;
        }
        if (!oracle::legal(p, b.addr, b.length, dw, cap)) ++violations;
        if (d.options.decouple_rw && !oracle::maximal(p, b.addr, b.length, left, dw, cap)) ++violations;
        const auto base = side == Side::Read ? d.src_addr : d.dst_addr;
        for (std::uint64_t k = 0; k < b.length; ++k) ++covered[b.addr - base + k];
        cursor += b.length;
        left -= b.length;
      }
      if (left != 0) ++violations;
      for (auto c : covered) {
        if (c != 1) {
          ++violations;
          break;
        }
      }
    }
  }
  return {violations == 0, fmt("%d transfers, %llu bursts, %llu violations", kLegalizerCases,
                               (unsigned long long)bursts, (unsigned long long)violations)};
}

// 2 -------------------------------------------------------------------------
Outcome copy_correctness() {
  std::mt19937_64 rng(0xB17E);
  const ProtocolId readers[] = {ProtocolId::Axi, ProtocolId::AxiLite, ProtocolId::Obi,
                                ProtocolId::TileLinkUL, ProtocolId::TileLinkUH, ProtocolId::Init};
  const ProtocolId writers[] = {ProtocolId::Axi, ProtocolId::AxiLite, ProtocolId::Obi,
                                ProtocolId::TileLinkUL, ProtocolId::TileLinkUH};
  int bad = 0, intra = 0, misaligned = 0, init = 0;
  std::string first_bad;
  for (int i = 0; i < kCopyCases; ++i) {
    const auto sp = readers[rng() % 6];
    const auto dp = rng() % 3 == 0 && sp != ProtocolId::Init ? sp : writers[rng() % 5];
    const unsigned dw = 8u << (rng() % 7);
    const char* presets[] = {"sram", "rpc_dram"};
    auto c = fixture::copy_system(sp, dp, dw, 1u << (rng() % 5), presets[rng() % 2]);
    c.engine.buffer_depth = 1 + static_cast<unsigned>(rng() % 4);
    c.sim.seed = rng() | 1;
    const std::uint64_t len = 1 + rng() % 4096;
    const Addr src = 0x10000 + rng() % 0x8000;
    Addr dst = 0x40000 + rng() % 0x8000;
    if (sp == dp) {
      ++intra;
      dst = rng() % 2 ? src + len + rng() % 64 : 0x20000 + rng() % 0x8000;
    }
    if ((src ^ dst) % (dw / 8) != 0) ++misaligned;
    auto t = fixture::copy(src, dst, len, sp, dp);
    t.desc.base.options.decouple_rw = rng() % 4 != 0;
    if (sp == ProtocolId::Init) {
      ++init;
      t.desc.base.options.init = {InitPattern::Kind::Pseudorandom, rng() | 1};
    }
    c.workload.transfers = {t};
    const auto r = simulate(c);
    const auto got = r.memories.at(fixture::port_of(dp))->read_range(dst, len);
    const auto want = sp == ProtocolId::Init ? oracle::xorshift_bytes(t.desc.base.options.init.value, len)
                                             : r.sources.at(0);
    if (got != want || r.report.payload_bytes != len) {
      if (bad++ == 0) {
        first_bad = fmt(" first: %s->%s dw %u len %llu", std::string(protocol_name(sp)).c_str(),
                        std::string(protocol_name(dp)).c_str(), dw, (unsigned long long)len);
      }
    }
  }
  return {bad == 0, fmt("%d runs (%d intra-port, %d misaligned, %d init), %d mismatches", kCopyCases,
                        intra, misaligned, init, bad) + first_bad};
}

// 3 -------------------------------------------------------------------------
Outcome launch_latency_exact() {
  struct Case {
    const char* name;
    std::vector<MidendSpec> mids;
    Cycle extra;
  };
  Rt3dSpec rt;
  rt.rt.enabled = false;
  rt.rt.num_launches = 0;
  const std::vector<Case> cases = {
      {"none", {}, 0},
      {"tensor_nd", {TensorNdSpec{2, false}}, 1},
      {"tensor_nd zero-latency", {TensorNdSpec{2, true}}, 0},
      {"tensor_2d", {Tensor2dSpec{}}, 1},
      {"mp_split", {MpSplitSpec{256, SplitSide::Dst}}, 1},
      {"tensor_nd+mp_split", {TensorNdSpec{2, false}, MpSplitSpec{256, SplitSide::Dst}}, 2},
      {"mp_split+mp_dist", {MpSplitSpec{256, SplitSide::Dst}, MpDistSpec{2, 256, SplitSide::Dst}}, 2},
      {"rt_3d", {rt}, 1},
  };
  int checked = 0;
  std::string bad;
  for (bool leg : {true, false}) {
    for (const auto& cs : cases) {
      auto c = fixture::copy_system(ProtocolId::Axi, ProtocolId::Axi);
      c.engine.has_legalizer = leg;
      c.midends = cs.mids;
      c.workload.transfers = {fixture::copy(0x100, 0x8000, 64), fixture::copy(0x400, 0x9000, 32)};
      const auto r = simulate(c).report;
      const Cycle want = (leg ? 2 : 1) + cs.extra;
      for (std::size_t k = 0; k < r.launches.size(); ++k) {
        ++checked;
        const auto got = r.launch_latency(k);
        if (!got || *got != want) {
          bad += fmt(" [%s leg=%d launch %zu: %lld != %lld]", cs.name, leg, k,
                     got ? (long long)*got : -1LL, (long long)want);
        }
      }
    }
  }
  return {bad.empty(), fmt("%d launches exact", checked) + bad};
}

// 4 -------------------------------------------------------------------------
Outcome pulp() {
  const auto c = load_system(config("pulp"));
  const auto r = simulate(c).report;
  const auto rb = r.data_beats(Side::Read), wb = r.data_beats(Side::Write);
  const bool ok = rb == 1024 && wb == 1024 && r.total_cycles >= 1024 && r.total_cycles <= kPulpMaxCycles;
  return {ok, fmt("read beats %llu, write beats %llu, cycles %llu in [1024, %llu]", (unsigned long long)rb,
                  (unsigned long long)wb, (unsigned long long)r.total_cycles,
                  (unsigned long long)kPulpMaxCycles)};
}

// 5 -------------------------------------------------------------------------
Outcome utilization_grid() {
  const char* presets[] = {"sram", "rpc_dram", "hbm"};
  const unsigned naxes[] = {1, 2, 4, 8, 16, 32, 64};
  const std::uint64_t pieces[] = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  std::map<std::tuple<std::string, unsigned, std::uint64_t>, double> u;
  for (const char* p : presets) {
    const auto base = load_system(config(p));
    for (unsigned nax : naxes) {
      for (auto piece : pieces) {
        auto c = base;
        apply_param(c, "nax", std::to_string(nax));
        apply_param(c, "piece_bytes", std::to_string(piece));
        apply_param(c, "total_bytes", "65536");
        const auto row = sweep_row(c, simulate(c).report);
        u[{p, nax, piece}] = row.util;
      }
    }
  }
  std::string bad;
  double worst_a = 1.0;
  for (unsigned nax : {8u, 16u, 32u, 64u}) worst_a = std::min(worst_a, u[{"sram", nax, 4}]);
  if (worst_a < kSramSmallUtil) bad += fmt(" (a) %.4f", worst_a);
  const double b = u[{"hbm", 64, 16}];
  if (b < kHbmUtil) bad += fmt(" (b) %.4f", b);
  int ceiling_checks = 0, order_checks = 0;
  for (const char* p : presets) {
    for (auto piece : pieces) {
      double prev = 0;
      for (unsigned nax : naxes) {
        const double v = u[{p, nax, piece}];
        if (piece < 4) {
          ++ceiling_checks;
          if (v > static_cast<double>(piece) / 4 + kUtilEps) bad += fmt(" (c) %s/%u/%llu %.4f", p, nax, (unsigned long long)piece, v);
        }
        ++order_checks;
        if (v + kUtilEps < prev) bad += fmt(" (d) %s/%u/%llu %.4f<%.4f", p, nax, (unsigned long long)piece, v, prev);
        prev = v;
      }
    }
  }
  return {bad.empty(), fmt("231 points; (a) min %.4f >= %.2f; (b) %.4f >= %.2f; (c) %d ceilings; (d) %d orderings",
                           worst_a, kSramSmallUtil, b, kHbmUtil, ceiling_checks, order_checks) + bad};
}

// 6 -------------------------------------------------------------------------
Outcome cheshire() {
  const auto c = load_system(config("cheshire"));
  const auto row = sweep_row(c, simulate(c).report);
  const bool ok = c.engine.dw == 64 && c.engine.nax_read == 8 && c.memory_for("axi")->model.latency == 13 &&
                  c.workload.fragmented->piece_bytes == 64 && row.util >= kCheshireUtil;
  return {ok, fmt("util %.4f >= %.2f (dw 64, nax 8, L 13, 64 B pieces)", row.util, kCheshireUtil)};
}

// 7 -------------------------------------------------------------------------
Outcome mempool() {
  const auto c = load_system(config("mempool"));
  const auto r = simulate(c).report;
  const double a = aggregate_utilization(r, "axi");
  const bool ok = r.n_backends == 4 && c.workload.transfers.at(0).desc.total_bytes() == 512 * 1024 && a >= kMempoolUtil;
  return {ok, fmt("aggregate util %.4f >= %.2f over %zu back-ends", a, kMempoolUtil, r.n_backends)};
}

// 8 -------------------------------------------------------------------------
Outcome area() {
  // Cells transcribed independently: rows decoupling, legalizer_state,
  // page_split, pow2_split, dataflow_element, manager, shifter.
  struct Col {
    const char* name;
    ProtocolId p;
    double r[7];
    double w[7];
  };
  const double base[7] = {3700, 1500, 0, 0, 1300, 70, 120};
  const Col cols[] = {
      {"axi", ProtocolId::Axi, {1400, 710, 95, 0, 0, 190, 250}, {1400, 710, 105, 0, 0, 30, 250}},
      {"axi_lite", ProtocolId::AxiLite, {310, 200, 7, 0, 0, 60, 75}, {310, 200, 8, 0, 0, 60, 75}},
      {"axi_stream", ProtocolId::AxiStream, {310, 180, 0, 0, 0, 60, 180}, {310, 180, 0, 0, 0, 60, 180}},
      {"obi", ProtocolId::Obi, {310, 180, 5, 0, 0, 60, 170}, {310, 180, 5, 0, 0, 35, 170}},
      {"tilelink", ProtocolId::TileLinkUH, {310, 215, 0, 20, 0, 230, 65}, {310, 215, 0, 20, 0, 150, 65}},
      {"init", ProtocolId::Init, {0, 21, 0, 0, 0, 55, 0}, {}},
  };
  int cells = 0;
  std::string bad;
  EngineConfig empty;
  empty.nax_read = empty.nax_write = kAreaBaseNax;
  const auto b0 = estimate_area(empty);
  for (int u = 0; u < 7; ++u) {
    ++cells;
    if (b0.unit(kAreaUnits[u]) != base[u]) bad += fmt(" base/%s", std::string(kAreaUnits[u]).c_str());
  }
  for (const auto& col : cols) {
    for (int w = 0; w < 2; ++w) {
      if (w && col.p == ProtocolId::Init) continue;
      EngineConfig c = empty;
      c.ports = {{col.p, w ? PortDirection::Write : PortDirection::Read}};
      const auto a = estimate_area(c);
      for (int u = 0; u < 7; ++u) {
        ++cells;
        const double want = w ? col.w[u] : col.r[u];
        if (a.unit(kAreaUnits[u]) - base[u] != want) {
          bad += fmt(" %s/%s/%s", col.name, w ? "write" : "read", std::string(kAreaUnits[u]).c_str());
        }
      }
    }
  }
  EngineConfig axi;
  axi.ports = {{ProtocolId::Axi, PortDirection::ReadWrite}};
  axi.nax_read = axi.nax_write = 32;
  const double total32 = estimate_area(axi).total;
  axi.nax_read = axi.nax_write = 33;
  const double marginal = estimate_area(axi).total - total32;
  if (total32 >= kAreaLimitGe) bad += fmt(" total %.0f", total32);
  if (std::abs(marginal - kMarginalGe) > kMarginalTol * kMarginalGe) bad += fmt(" marginal %.1f", marginal);
  return {bad.empty(), fmt("%d cells verbatim; AXI at NAx=32 %.0f GE < %.0f; marginal %.1f GE/slot within %.0f +- %.0f%%",
                           cells, total32, kAreaLimitGe, marginal, kMarginalGe, kMarginalTol * 100) + bad};
}

// 9 -------------------------------------------------------------------------
Outcome nnls() {
  std::mt19937_64 rng(0x5EED);
  std::normal_distribution<double> noise(0.0, kNnlsNoise);
  std::uniform_real_distribution<double> feat(0.0, 4.0), coef(0.0, 1000.0);
  const int n = 8, m_fit = 48, m_test = 200;
  double err_sum = 0, worst_kkt = 0;
  for (int t = 0; t < kNnlsTrials; ++t) {
    Eigen::VectorXd truth(n);
    for (int j = 0; j < n; ++j) truth(j) = rng() % 4 == 0 ? 0.0 : coef(rng);
    auto make = [&](int rows) {
      Eigen::MatrixXd a(rows, n);
      for (int i = 0; i < rows; ++i) {
        a(i, 0) = 1.0;
        for (int j = 1; j < n; ++j) a(i, j) = feat(rng);
      }
      return a;
    };
    const Eigen::MatrixXd a = make(m_fit);
    Eigen::VectorXd b = a * truth;
    for (int i = 0; i < m_fit; ++i) b(i) *= 1.0 + noise(rng);
    const auto fit = fit_nnls(a, b);
    worst_kkt = std::max(worst_kkt, check_kkt(a, b, fit.x, kKktTol).max_violation);
    const Eigen::MatrixXd at = make(m_test);
    const Eigen::VectorXd yt = at * truth, yp = at * fit.x;
    double e = 0;
    for (int i = 0; i < m_test; ++i) e += std::abs(yp(i) - yt(i)) / yt(i);
    err_sum += e / m_test;
  }
  const double mean = err_sum / kNnlsTrials;
  return {mean <= kNnlsMaxError && worst_kkt <= kKktTol,
          fmt("mean relative error %.4f <= %.2f over %d trials; worst KKT violation %.2e <= %.0e", mean,
              kNnlsMaxError, kNnlsTrials, worst_kkt, kKktTol)};
}

// 10 ------------------------------------------------------------------------
Outcome error_handling() {
  constexpr std::uint64_t kBurst = 64, kN = 16, kK = 5;
  std::string bad;
  int runs = 0;
  for (unsigned nax : {1u, 4u}) {
    for (auto action : {ErrorAction::Replay, ErrorAction::Abort, ErrorAction::Continue}) {
      ++runs;
      auto c = fixture::copy_system(ProtocolId::Axi, ProtocolId::Axi, 32, nax);
      c.memory[0].model.error_plan = {{kK, std::nullopt, std::nullopt, Side::Read, "slverr"}};
      auto t = fixture::copy(0x1000, 0x20000, kBurst * kN);
      t.desc.base.options.user_burst_cap = kBurst;
      t.desc.base.options.error_action_default = action;
      c.workload.transfers = {t};
      SimHooks h;
      h.trace = true;
      const auto res = simulate(c, h);
      const auto& r = res.report;
      const Addr bad_addr = 0x1000 + kK * kBurst;
      std::vector<TraceEvent> ars;
      std::optional<Cycle> err_at;
      for (const auto& e : r.trace) {
        if (e.unit == "be0" && e.event == "ar") ars.push_back(e);
        if (e.event == "error" && !err_at) err_at = e.cycle;
      }
      const auto got = res.memories.at("axi")->read_range(0x20000, kBurst * kN);
      const auto& src = res.sources.at(0);
      const char* name = action == ErrorAction::Replay ? "replay" : action == ErrorAction::Abort ? "abort" : "continue";
      auto flag = [&](const std::string& what) { bad += fmt(" [nax %u %s: %s]", nax, name, what.c_str()); };
      if (!err_at) {
        flag("no error observed");
        continue;
      }
      if (action == ErrorAction::Replay) {
        const auto at_k = std::count_if(ars.begin(), ars.end(), [&](auto& e) { return e.addr == bad_addr; });
        if (ars.size() != kN + 1 || at_k != 2) flag(fmt("%zu reads, %lld at burst k", ars.size(), (long long)at_k));
        std::vector<Addr> after;
        for (const auto& e : ars) {
          if (e.cycle > *err_at) after.push_back(e.addr);
        }
        if (after.empty() || after.front() != bad_addr) flag("first read after the error is not burst k");
        if (got != src || r.launches[0].failed || !r.skipped.empty()) flag("copy not byte-exact");
      } else if (action == ErrorAction::Abort) {
        for (const auto& e : ars) {
          if (e.cycle >= *err_at && e.addr > bad_addr) flag(fmt("read at 0x%llx after the error", (unsigned long long)e.addr));
        }
        if (nax == 1) {
          Addr top = 0;
          for (const auto& e : ars) top = std::max(top, e.addr);
          if (top != bad_addr) flag("a burst beyond k was issued");
        }
        if (!r.launches[0].failed || r.failures != 1) flag("launch not marked failed");
      } else {
        if (r.skipped.size() != 1) {
          flag(fmt("%zu skipped ranges", r.skipped.size()));
        } else {
          const auto& s = r.skipped[0];
          if (s.dst_addr != 0x20000 + kK * kBurst || s.length != kBurst) flag("wrong skipped range");
          const auto off = kK * kBurst;
          if (!std::equal(got.begin(), got.begin() + off, src.begin()) ||
              !std::equal(got.begin() + off + kBurst, got.end(), src.begin() + off + kBurst)) {
            flag("bytes outside the skipped range differ");
          }
        }
        if (r.launches[0].failed || !r.launches[0].completion) flag("launch did not complete");
      }
    }
  }
  return {bad.empty(), fmt("%d runs, error on burst %llu of %llu", runs, (unsigned long long)kK,
                           (unsigned long long)kN) + bad};
}

// 11 ------------------------------------------------------------------------
Outcome determinism() {
  int runs = 0;
  std::string bad;
  for (const char* name : {"base", "pulp", "cheshire", "mempool", "manticore", "sram", "rpc_dram", "hbm"}) {
    for (std::uint64_t seed : {1ull, 0xDEADBEEFull}) {
      auto c = load_system(config(name));
      c.sim.seed = seed;
      SimHooks h;
      h.trace = true;
      std::string csv[2], trace[2];
      for (int k = 0; k < 2; ++k) {
        const auto r = simulate(c, h).report;
        csv[k] = emit_csv({sweep_row(c, r)}) + report_json(r).dump();
        trace[k] = trace_csv(r.trace);
      }
      ++runs;
      if (csv[0] != csv[1] || trace[0] != trace[1] || trace[0].size() < 100) bad += fmt(" %s/%llu", name, (unsigned long long)seed);
    }
  }
  return {bad.empty(), fmt("%d config/seed pairs, CSV and trace bit-identical", runs) + bad};
}

}  // namespace

int main() {
  report(1, "legalizer coverage", legalizer_coverage);
  report(2, "copy correctness", copy_correctness);
  report(3, "launch latency", launch_latency_exact);
  report(4, "pulp analogue", pulp);
  report(5, "utilization curves", utilization_grid);
  report(6, "cheshire analogue", cheshire);
  report(7, "mempool analogue", mempool);
  report(8, "area model", area);
  report(9, "nnls fitter", nnls);
  report(10, "error handling", error_handling);
  report(11, "determinism", determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
