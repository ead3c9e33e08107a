// SPDX-License-Identifier: Apache-2.0
//
// Analytical cost models: a table-driven area model in gate equivalents, an
// affine longest-path timing model, the launch-latency model, and the
// non-negative least-squares solver used to fit them.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "idma/core.hpp"
#include "idma/midend.hpp"

namespace idma {

// Parameter an area cell scales with, linearly, relative to the base
// configuration (AW = 32, DW = 32, NAx = 16).
enum class Scaling : std::uint8_t { NAx, AW, DW, Const };

std::string_view scaling_name(Scaling s);

inline constexpr unsigned kAreaBaseAw = 32;
inline constexpr unsigned kAreaBaseDw = 32;
inline constexpr unsigned kAreaBaseNax = 16;

struct AreaCell {
  std::string unit;    // decoupling, legalizer_state, page_split, ...
  std::string column;  // base, axi, axi_lite, axi_stream, obi, tilelink, init
  std::string direction;  // base, read, write
  double ge = 0.0;
  Scaling scaling = Scaling::Const;
  bool max_not_sum = false;  // over ports of one direction, only the largest counts

  bool operator==(const AreaCell&) const = default;
};

struct AreaTable {
  std::vector<AreaCell> cells;

  static AreaTable builtin();
  // Columns: unit,column,direction,ge,scaling,max_not_sum
  static AreaTable from_csv(std::string_view text);
  std::string to_csv() const;
  const AreaCell& cell(std::string_view unit, std::string_view column,
                       std::string_view direction) const;

  bool operator==(const AreaTable&) const = default;
};

// Area-table column for a protocol (both TileLink variants share one).
std::string_view area_column(ProtocolId p);

struct AreaLine {
  std::string unit;
  double ge = 0.0;
};

struct AreaBreakdown {
  std::vector<AreaLine> units;
  double total = 0.0;

  double unit(std::string_view name) const;
};

inline constexpr std::string_view kAreaUnits[] = {
    "decoupling", "legalizer_state", "page_split", "pow2_split",
    "dataflow_element", "manager", "shifter"};

AreaBreakdown estimate_area(const EngineConfig& cfg, const AreaTable& table = AreaTable::builtin());

// longest_path_ns = t0 + k_dw*DW + k_aw*AW + k_nax*log2(NAx) + sum of the
// offsets of the protocols present; f_max = 1 / longest_path.
struct TimingModel {
  double t0 = 0.0;
  double k_dw = 0.0;
  double k_aw = 0.0;
  double k_nax = 0.0;
  std::array<double, 7> protocol_offset{};
  bool fitted = false;

  // Synthetic coefficients, not derived from any silicon.
  static TimingModel synthetic();
  static constexpr std::size_t kFeatures = 11;
  static Eigen::VectorXd features(const EngineConfig& cfg);
  Eigen::VectorXd coefficients() const;
  static TimingModel from_coefficients(const Eigen::VectorXd& c);
};

struct TimingEstimate {
  double longest_path_ns = 0.0;
  double fmax_ghz = 0.0;
};

// UnfittedModel for a default-constructed model.
TimingEstimate estimate_timing(const EngineConfig& cfg, const TimingModel& model);

struct TimingSample {
  EngineConfig cfg;
  double longest_path_ns = 0.0;
};

TimingModel fit_timing(const std::vector<TimingSample>& samples);

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  std::size_t iterations = 0;
};

// Lawson-Hanson active-set NNLS: min ||Ax - b|| subject to x >= 0. Ties in
// the entering-variable choice go to the lowest column index, so of two
// identical columns the first carries the weight. Underdetermined when A
// has fewer rows than columns.
NnlsResult fit_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

struct KktCheck {
  double max_violation = 0.0;  // scale-free, see check_kkt
  bool ok = false;
};

// KKT conditions of the NNLS problem with w = A^T (b - Ax): x >= 0, w <= 0
// where x = 0, w = 0 where x > 0. Each w_i is normalized by ||A_i|| ||b||.
KktCheck check_kkt(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
                   double tol = 1e-9);

// Launch-to-first-read latency, identical to the engine's.
Cycle latency_model(const EngineConfig& cfg, const std::vector<MidendSpec>& midends = {});

}  // namespace idma
