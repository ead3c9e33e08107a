// SPDX-License-Identifier: Apache-2.0
//
// idma_sim: batch front door to the simulator and the cost models.
//
//   idma_sim simulate --config C [--trace T] [--seed S] [--format csv|json] [--out O]
//   idma_sim sweep    --config C --param P --values V1,V2,... [--format] [--out]
//   idma_sim legalize --src A --dst A --len N --proto P [--dw W] [--side read|write|both]
//   idma_sim estimate area|timing|latency --config C [--table CSV] [--format]
//   idma_sim presets
//
// Exit status: 0 on success, 1 on configuration or input errors, 2 when the
// simulation itself breaks a contract (deadlock, capacity overrun, ...).
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "idma/config_json.hpp"
#include "idma/costmodel.hpp"
#include "idma/legalizer.hpp"
#include "idma/system.hpp"

namespace {

using namespace idma;

struct Options {
  std::string config;
  std::string out;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string param;
  std::string values;
  std::string table;
  std::string what;
  std::string src = "0";
  std::string dst = "0";
  std::string len = "0";
  std::string proto = "axi";
  std::string dst_proto;
  unsigned dw = 32;
  std::string side = "read";
  std::string burst_cap;
};

std::uint64_t number(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 0);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(Errc::ConfigError, std::string("bad ") + what + ": " + s);
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) fail(Errc::ConfigError, "cannot write " + o.out);
  f << text;
}

std::string render(const Options& o, const std::vector<SweepRow>& rows) {
  if (o.format == "json") return rows_json(rows).dump(2) + "\n";
  return emit_csv(rows);
}

SystemConfig load(const Options& o) {
  auto cfg = load_system(o.config);
  if (o.seed) cfg.sim.seed = *o.seed;
  return cfg;
}

int run_simulate(const Options& o) {
  const auto cfg = load(o);
  SimHooks hooks;
  hooks.trace = !o.trace.empty();
  const auto res = simulate(cfg, hooks);
  if (!o.trace.empty()) {
    std::ofstream f(o.trace);
    if (!f) fail(Errc::ConfigError, "cannot write " + o.trace);
    f << trace_csv(res.report.trace);
  }
  if (o.format == "json") {
    auto j = report_json(res.report);
    j["config_id"] = cfg.id;
    emit(o, j.dump(2) + "\n");
  } else {
    emit(o, emit_csv({sweep_row(cfg, res.report)}));
  }
  return 0;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IDMA_SIM_THREADS")) {
    const auto cap = std::strtoull(env, nullptr, 10);
    if (cap > 0) n = std::min<std::size_t>(n, cap);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

int run_sweep(const Options& o) {
  const auto base = load(o);
  const auto values = split_csv(o.values);
  if (o.param.empty() || values.empty()) fail(Errc::ConfigError, "sweep needs --param and --values");
  std::vector<SystemConfig> points;
  for (const auto& v : values) {
    auto cfg = base;
    apply_param(cfg, o.param, v);
    check_system(cfg);
    points.push_back(std::move(cfg));
  }
  std::vector<SweepRow> rows(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < points.size();) {
      try {
        rows[i] = sweep_row(points[i], simulate(points[i]).report);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < worker_count(points.size()); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  emit(o, render(o, rows));
  return 0;
}

int run_legalize(const Options& o) {
  TransferDescriptor1D d;
  d.src_addr = number(o.src, "--src");
  d.dst_addr = number(o.dst, "--dst");
  d.length = number(o.len, "--len");
  const auto sp = parse_protocol(o.proto);
  const auto dp = parse_protocol(o.dst_proto.empty() ? o.proto : o.dst_proto);
  if (!sp || !dp) fail(Errc::UnknownProtocol, "unknown protocol");
  d.src_protocol = *sp;
  d.dst_protocol = *dp;
  if (!o.burst_cap.empty()) d.options.user_burst_cap = number(o.burst_cap, "--burst-cap");
  EngineConfig cfg;
  cfg.dw = o.dw;
  cfg.aw = 64;
  cfg.ports = {{*sp, PortDirection::Read}};
  if (*dp != *sp) cfg.ports.push_back({*dp, PortDirection::Write});
  else cfg.ports[0].direction = PortDirection::ReadWrite;
  const auto lt = legalize(d, require_valid(cfg));
  std::vector<LegalBurst> rows;
  if (o.side == "read" || o.side == "both") rows = lt.read_bursts;
  if (o.side == "write" || o.side == "both") {
    rows.insert(rows.end(), lt.write_bursts.begin(), lt.write_bursts.end());
  }
  if (o.side != "read" && o.side != "write" && o.side != "both") {
    fail(Errc::ConfigError, "--side must be read, write or both");
  }
  if (o.format == "json") {
    auto j = nlohmann::json::array();
    for (const auto& b : rows) {
      j.push_back({{"side", side_name(b.side)}, {"seq", b.seq}, {"addr", b.addr}, {"len", b.length}});
    }
    emit(o, j.dump(2) + "\n");
    return 0;
  }
  std::string out = "side,seq,addr,len\n";
  char buf[96];
  for (const auto& b : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,0x%llx,%llu\n", std::string(side_name(b.side)).c_str(),
                  static_cast<unsigned long long>(b.seq), static_cast<unsigned long long>(b.addr),
                  static_cast<unsigned long long>(b.length));
    out += buf;
  }
  emit(o, out);
  return 0;
}

// Accepts a full system configuration or a bare engine object.
void load_engine(const Options& o, EngineConfig& engine, std::vector<MidendSpec>& midends) {
  const auto j = read_json_file(o.config);
  if (j.is_object() && j.contains("engine")) {
    const auto sys = system_from_json(j);
    engine = sys.engine;
    midends = sys.midends;
  } else {
    engine = engine_from_json(j);
  }
}

int run_estimate(const Options& o) {
  EngineConfig engine;
  std::vector<MidendSpec> midends;
  load_engine(o, engine, midends);
  require_valid(engine);
  const bool json = o.format == "json";
  if (o.what == "area") {
    AreaTable table = AreaTable::builtin();
    if (!o.table.empty()) {
      std::ifstream f(o.table);
      if (!f) fail(Errc::ConfigError, "cannot open " + o.table);
      std::stringstream ss;
      ss << f.rdbuf();
      table = AreaTable::from_csv(ss.str());
    }
    const auto a = estimate_area(engine, table);
    if (json) {
      nlohmann::json j;
      for (const auto& u : a.units) j["units"][u.unit] = u.ge;
      j["total_ge"] = a.total;
      emit(o, j.dump(2) + "\n");
    } else {
      std::string out = "unit,ge\n";
      char buf[96];
      for (const auto& u : a.units) {
        std::snprintf(buf, sizeof buf, "%s,%.1f\n", u.unit.c_str(), u.ge);
        out += buf;
      }
      std::snprintf(buf, sizeof buf, "total,%.1f\n", a.total);
      emit(o, out + buf);
    }
  } else if (o.what == "timing") {
    const auto t = estimate_timing(engine, TimingModel::synthetic());
    if (json) {
      emit(o, nlohmann::json{{"longest_path_ns", t.longest_path_ns}, {"fmax_ghz", t.fmax_ghz},
                             {"model", "synthetic"}}
                      .dump(2) +
                  "\n");
    } else {
      char buf[128];
      std::snprintf(buf, sizeof buf, "longest_path_ns,fmax_ghz,model\n%.6f,%.6f,synthetic\n",
                    t.longest_path_ns, t.fmax_ghz);
      emit(o, buf);
    }
  } else if (o.what == "latency") {
    const auto l = latency_model(engine, midends);
    emit(o, json ? nlohmann::json{{"launch_latency", l}}.dump(2) + "\n"
                 : "launch_latency\n" + std::to_string(l) + "\n");
  } else {
    fail(Errc::ConfigError, "estimate takes area, timing or latency");
  }
  return 0;
}

int run_presets(const Options& o) {
  std::string out = "name,latency,max_outstanding\n";
  for (auto name : kPresetNames) {
    const auto m = preset(name);
    out += std::string(name) + "," + std::to_string(m.latency) + "," +
           std::to_string(m.max_outstanding) + "\n";
  }
  emit(o, out);
  return 0;
}

void check_format(const Options& o) {
  if (o.format != "csv" && o.format != "json") fail(Errc::ConfigError, "--format must be csv or json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cycle-level DMA engine simulator and cost models"};
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->add_option("--format", o.format, "csv or json");
  };

  auto* sim = app.add_subcommand("simulate", "run one configuration");
  sim->add_option("--config", o.config)->required();
  sim->add_option("--trace", o.trace, "write the event trace as CSV");
  sim->add_option("--seed", o.seed);
  common(sim);

  auto* sweep = app.add_subcommand("sweep", "run one configuration over a parameter range");
  sweep->add_option("--config", o.config)->required();
  sweep->add_option("--param", o.param)->required();
  sweep->add_option("--values", o.values)->required();
  sweep->add_option("--seed", o.seed);
  common(sweep);

  auto* leg = app.add_subcommand("legalize", "print the bursts of one transfer");
  leg->add_option("--src", o.src)->required();
  leg->add_option("--dst", o.dst)->required();
  leg->add_option("--len", o.len)->required();
  leg->add_option("--proto", o.proto, "protocol of both sides");
  leg->add_option("--dst-proto", o.dst_proto, "destination protocol when different");
  leg->add_option("--dw", o.dw);
  leg->add_option("--side", o.side, "read, write or both");
  leg->add_option("--burst-cap", o.burst_cap, "burst cap in bytes");
  common(leg);

  auto* est = app.add_subcommand("estimate", "area, timing or launch-latency estimate");
  est->add_option("what", o.what, "area, timing or latency")->required();
  est->add_option("--config", o.config)->required();
  est->add_option("--table", o.table, "area table CSV");
  common(est);

  auto* pre = app.add_subcommand("presets", "list endpoint presets");
  common(pre);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    check_format(o);
    if (*sim) return run_simulate(o);
    if (*sweep) return run_sweep(o);
    if (*leg) return run_legalize(o);
    if (*est) return run_estimate(o);
    return run_presets(o);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return is_contract_violation(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
