// SPDX-License-Identifier: Apache-2.0
#include "idma/costmodel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>


namespace idma {

std::string_view scaling_name(Scaling s) {
  switch (s) {
    case Scaling::NAx: return "nax";
    case Scaling::AW: return "aw";
    case Scaling::DW: return "dw";
    case Scaling::Const: return "const";
  }
  return "?";
}

namespace {

Scaling parse_scaling(std::string_view s) {
  if (s == "nax") return Scaling::NAx;
  if (s == "aw") return Scaling::AW;
  if (s == "dw") return Scaling::DW;
  if (s == "const") return Scaling::Const;
  fail(Errc::ConfigError, "unknown scaling tag '" + std::string(s) + "'");
}

// {read, write} gate counts for one protocol column.
struct Pair {
  double r, w;
};

struct ColumnRow {
  const char* column;
  Pair decoupling, legalizer, page, pow2, manager, shifter;
};

constexpr ColumnRow kColumns[] = {
    {"axi", {1400, 1400}, {710, 710}, {95, 105}, {0, 0}, {190, 30}, {250, 250}},
    {"axi_lite", {310, 310}, {200, 200}, {7, 8}, {0, 0}, {60, 60}, {75, 75}},
    {"axi_stream", {310, 310}, {180, 180}, {0, 0}, {0, 0}, {60, 60}, {180, 180}},
    {"obi", {310, 310}, {180, 180}, {5, 5}, {0, 0}, {60, 35}, {170, 170}},
    {"tilelink", {310, 310}, {215, 215}, {0, 0}, {20, 20}, {230, 150}, {65, 65}},
};

double scale_factor(Scaling s, unsigned aw, unsigned dw, double nax) {
  switch (s) {
    case Scaling::NAx: return nax / kAreaBaseNax;
    case Scaling::AW: return static_cast<double>(aw) / kAreaBaseAw;
    case Scaling::DW: return static_cast<double>(dw) / kAreaBaseDw;
    case Scaling::Const: return 1.0;
  }
  return 1.0;
}

std::string format_ge(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

AreaTable AreaTable::builtin() {
  AreaTable t;
  auto add = [&](const char* unit, const char* column, const char* dir, double ge, Scaling s,
                 bool max_not_sum) { t.cells.push_back({unit, column, dir, ge, s, max_not_sum}); };
  add("decoupling", "base", "base", 3700, Scaling::NAx, false);
  add("legalizer_state", "base", "base", 1500, Scaling::AW, false);
  add("page_split", "base", "base", 0, Scaling::Const, false);
  add("pow2_split", "base", "base", 0, Scaling::Const, false);
  add("dataflow_element", "base", "base", 1300, Scaling::DW, false);
  add("manager", "base", "base", 70, Scaling::DW, false);
  add("shifter", "base", "base", 120, Scaling::DW, false);
  for (const auto& c : kColumns) {
    for (int w = 0; w < 2; ++w) {
      const char* dir = w ? "write" : "read";
      auto pick = [&](const Pair& p) { return w ? p.w : p.r; };
      add("decoupling", c.column, dir, pick(c.decoupling), Scaling::NAx, false);
      add("legalizer_state", c.column, dir, pick(c.legalizer), Scaling::AW, true);
      add("page_split", c.column, dir, pick(c.page), Scaling::Const, false);
      add("pow2_split", c.column, dir, pick(c.pow2), Scaling::Const, false);
      add("dataflow_element", c.column, dir, 0, Scaling::DW, false);
      add("manager", c.column, dir, pick(c.manager), Scaling::DW, false);
      add("shifter", c.column, dir, pick(c.shifter), Scaling::DW, true);
    }
  }
  add("decoupling", "init", "read", 0, Scaling::NAx, false);
  add("legalizer_state", "init", "read", 21, Scaling::AW, false);
  add("page_split", "init", "read", 0, Scaling::Const, false);
  add("pow2_split", "init", "read", 0, Scaling::Const, false);
  add("dataflow_element", "init", "read", 0, Scaling::DW, false);
  add("manager", "init", "read", 55, Scaling::DW, false);
  add("shifter", "init", "read", 0, Scaling::DW, true);
  return t;
}

AreaTable AreaTable::from_csv(std::string_view text) {
  AreaTable t;
  std::istringstream is{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line != "unit,column,direction,ge,scaling,max_not_sum") {
        fail(Errc::ConfigError, "unexpected area table header: " + line);
      }
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string item;
    while (std::getline(ls, item, ',')) f.push_back(item);
    if (f.size() != 6) fail(Errc::ConfigError, "area table row needs 6 fields: " + line);
    AreaCell c;
    c.unit = f[0];
    c.column = f[1];
    c.direction = f[2];
    try {
      c.ge = std::stod(f[3]);
    } catch (const std::exception&) {
      fail(Errc::ConfigError, "bad gate count in area table: " + f[3]);
    }
    if (c.ge < 0) fail(Errc::ConfigError, "negative gate count in area table");
    c.scaling = parse_scaling(f[4]);
    if (f[5] != "0" && f[5] != "1") fail(Errc::ConfigError, "max_not_sum must be 0 or 1");
    c.max_not_sum = f[5] == "1";
    t.cells.push_back(std::move(c));
  }
  return t;
}

std::string AreaTable::to_csv() const {
  std::ostringstream os;
  os << "unit,column,direction,ge,scaling,max_not_sum\n";
  for (const auto& c : cells) {
    os << c.unit << ',' << c.column << ',' << c.direction << ',' << format_ge(c.ge) << ','
       << scaling_name(c.scaling) << ',' << (c.max_not_sum ? 1 : 0) << '\n';
  }
  return os.str();
}

const AreaCell& AreaTable::cell(std::string_view unit, std::string_view column,
                                std::string_view direction) const {
  for (const auto& c : cells) {
    if (c.unit == unit && c.column == column && c.direction == direction) return c;
  }
  fail(Errc::UnknownProtocol, "area table has no cell " + std::string(unit) + "/" +
                                  std::string(column) + "/" + std::string(direction));
}

std::string_view area_column(ProtocolId p) {
  switch (p) {
    case ProtocolId::Axi: return "axi";
    case ProtocolId::AxiLite: return "axi_lite";
    case ProtocolId::AxiStream: return "axi_stream";
    case ProtocolId::Obi: return "obi";
    case ProtocolId::TileLinkUL:
    case ProtocolId::TileLinkUH: return "tilelink";
    case ProtocolId::Init: return "init";
  }
  fail(Errc::UnknownProtocol, "protocol without an area column");
}

double AreaBreakdown::unit(std::string_view name) const {
  for (const auto& u : units) {
    if (u.unit == name) return u.ge;
  }
  return 0.0;
}

AreaBreakdown estimate_area(const EngineConfig& cfg, const AreaTable& table) {
  const double nax_r = cfg.nax_read;
  const double nax_w = cfg.nax_write;
  const double nax_base = std::max(nax_r, nax_w);

  std::map<std::string, double> sums;
  std::map<std::pair<std::string, std::string>, double> maxima;  // (unit, direction)
  for (const auto& c : table.cells) {
    if (c.direction == "base") {
      sums[c.unit] += c.ge * scale_factor(c.scaling, cfg.aw, cfg.dw, nax_base);
    }
  }
  for (const auto& port : cfg.ports) {
    const auto column = std::string(area_column(port.protocol));
    for (const char* dir : {"read", "write"}) {
      const bool is_read = std::string_view(dir) == "read";
      if (is_read && port.direction == PortDirection::Write) continue;
      if (!is_read && port.direction == PortDirection::Read) continue;
      bool found = false;
      for (const auto& c : table.cells) {
        if (c.column != column || c.direction != dir) continue;
        found = true;
        const double v = c.ge * scale_factor(c.scaling, cfg.aw, cfg.dw, is_read ? nax_r : nax_w);
        if (c.max_not_sum) {
          auto& m = maxima[{c.unit, dir}];
          m = std::max(m, v);
        } else {
          sums[c.unit] += v;
        }
      }
      if (!found) {
        fail(Errc::UnknownProtocol, "area table lacks " + column + " " + dir + " cells");
      }
    }
  }
  for (const auto& [key, v] : maxima) sums[key.first] += v;

  AreaBreakdown out;
  for (auto name : kAreaUnits) {
    const auto v = sums[std::string(name)];
    out.units.push_back({std::string(name), v});
    out.total += v;
  }
  return out;
}

TimingModel TimingModel::synthetic() {
  TimingModel m;
  m.t0 = 0.35;
  m.k_dw = 0.0004;
  m.k_aw = 0.0005;
  m.k_nax = 0.02;
  m.protocol_offset = {0.12, 0.03, 0.06, 0.02, 0.08, 0.08, 0.01};
  m.fitted = true;
  return m;
}

Eigen::VectorXd TimingModel::features(const EngineConfig& cfg) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kFeatures);
  f(0) = 1.0;
  f(1) = cfg.dw;
  f(2) = cfg.aw;
  f(3) = std::log2(static_cast<double>(std::max(cfg.nax_read, cfg.nax_write)));
  for (const auto& p : cfg.ports) f(4 + static_cast<int>(p.protocol)) = 1.0;
  return f;
}

Eigen::VectorXd TimingModel::coefficients() const {
  Eigen::VectorXd c(kFeatures);
  c << t0, k_dw, k_aw, k_nax, protocol_offset[0], protocol_offset[1], protocol_offset[2],
      protocol_offset[3], protocol_offset[4], protocol_offset[5], protocol_offset[6];
  return c;
}

TimingModel TimingModel::from_coefficients(const Eigen::VectorXd& c) {
  if (c.size() != static_cast<Eigen::Index>(kFeatures)) {
    fail(Errc::InvalidArgument, "timing model needs 11 coefficients");
  }
  TimingModel m;
  m.t0 = c(0);
  m.k_dw = c(1);
  m.k_aw = c(2);
  m.k_nax = c(3);
  for (int i = 0; i < 7; ++i) m.protocol_offset[static_cast<std::size_t>(i)] = c(4 + i);
  m.fitted = true;
  return m;
}

TimingEstimate estimate_timing(const EngineConfig& cfg, const TimingModel& model) {
  if (!model.fitted) fail(Errc::UnfittedModel, "timing model has no coefficients");
  const double path = TimingModel::features(cfg).dot(model.coefficients());
  if (!(path > 0)) fail(Errc::InvalidArgument, "timing model predicts a non-positive path");
  return {path, 1.0 / path};
}

TimingModel fit_timing(const std::vector<TimingSample>& samples) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(samples.size()), TimingModel::kFeatures);
  Eigen::VectorXd b(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = TimingModel::features(samples[i].cfg).transpose();
    b(static_cast<Eigen::Index>(i)) = samples[i].longest_path_ns;
  }
  return TimingModel::from_coefficients(fit_nnls(a, b).x);
}

NnlsResult fit_nnls(const Eigen::MatrixXd& a_in, const Eigen::VectorXd& b) {
  const auto m = a_in.rows();
  const auto n = a_in.cols();
  if (b.size() != m) fail(Errc::InvalidArgument, "row count of A and b differ");
  if (m < n) {
    fail(Errc::Underdetermined, std::to_string(m) + " samples for " + std::to_string(n) +
                                    " coefficients");
  }

  // Work on unit-norm columns; zero columns stay at zero.
  Eigen::VectorXd norms = a_in.colwise().norm().transpose();
  Eigen::MatrixXd a = a_in;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (norms(j) > 0) a.col(j) /= norms(j);
  }

  const double bnorm = b.norm();
  const double tol = 1e-13 * std::max(bnorm, 1.0);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = a.transpose() * (b - a * x);
  NnlsResult out;

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd ap(m, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Eigen::VectorXd sp = ap.colPivHouseholderQr().solve(b);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s(idx[k]) = sp(static_cast<Eigen::Index>(k));
    return s;
  };

  const std::size_t max_iter = static_cast<std::size_t>(30 * n + 30);
  while (out.iterations < max_iter) {
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)] || norms(j) == 0) continue;
      if (w(j) > tol && (best < 0 || w(j) > w(best))) best = j;
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    ++out.iterations;

    for (;;) {
      Eigen::VectorXd s = solve_passive();
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0) feasible = false;
      }
      if (feasible) {
        x = s;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0) {
          alpha = std::min(alpha, x(j) / (x(j) - s(j)));
        }
      }
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0;
        }
      }
    }
    w = a.transpose() * (b - a * x);
  }

  out.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (norms(j) > 0) out.x(j) = std::max(0.0, x(j)) / norms(j);
  }
  out.residual_norm = (a_in * out.x - b).norm();
  return out;
}

KktCheck check_kkt(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
                   double tol) {
  KktCheck k;
  const Eigen::VectorXd w = a.transpose() * (b - a * x);
  const double bnorm = std::max(b.norm(), 1e-300);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double cn = a.col(i).norm();
    if (cn == 0) continue;
    const double wi = w(i) / (cn * bnorm);
    double v = 0.0;
    if (x(i) < 0) {
      v = std::abs(x(i)) * cn / bnorm;
    } else if (x(i) == 0) {
      v = std::max(0.0, wi);
    } else {
      v = std::abs(wi);
    }
    k.max_violation = std::max(k.max_violation, v);
  }
  k.ok = k.max_violation <= tol;
  return k;
}

Cycle latency_model(const EngineConfig& cfg, const std::vector<MidendSpec>& midends) {
  Cycle cycles = cfg.has_legalizer ? 2 : 1;
  for (const auto& m : midends) {
    const auto* nd = std::get_if<TensorNdSpec>(&m);
    cycles += (nd && nd->zero_latency) ? 0 : 1;
  }
  return cycles;
}

}  // namespace idma
