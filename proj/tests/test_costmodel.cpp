// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "idma/costmodel.hpp"
#include "oracles.hpp"

using namespace idma;

namespace {

EngineConfig axi_base(unsigned nax = kAreaBaseNax) {
  EngineConfig c;
  c.ports = {{ProtocolId::Axi, PortDirection::ReadWrite}};
  c.nax_read = c.nax_write = nax;
  return c;
}

double ge(std::string_view unit, std::string_view col, std::string_view dir) {
  return AreaTable::builtin().cell(unit, col, dir).ge;
}

}  // namespace

TEST_CASE("area table cells") {
  CHECK(ge("decoupling", "base", "base") == 3700);
  CHECK(ge("legalizer_state", "base", "base") == 1500);
  CHECK(ge("dataflow_element", "base", "base") == 1300);
  CHECK(ge("manager", "base", "base") == 70);
  CHECK(ge("shifter", "base", "base") == 120);
  CHECK(ge("decoupling", "axi", "read") == 1400);
  CHECK(ge("legalizer_state", "axi", "write") == 710);
  CHECK(ge("page_split", "axi", "read") == 95);
  CHECK(ge("page_split", "axi", "write") == 105);
  CHECK(ge("manager", "axi", "read") == 190);
  CHECK(ge("manager", "axi", "write") == 30);
  CHECK(ge("shifter", "axi", "read") == 250);
  CHECK(ge("legalizer_state", "axi_lite", "read") == 200);
  CHECK(ge("page_split", "axi_lite", "write") == 8);
  CHECK(ge("shifter", "axi_stream", "read") == 180);
  CHECK(ge("page_split", "axi_stream", "read") == 0);
  CHECK(ge("manager", "obi", "write") == 35);
  CHECK(ge("shifter", "obi", "read") == 170);
  CHECK(ge("pow2_split", "tilelink", "read") == 20);
  CHECK(ge("manager", "tilelink", "read") == 230);
  CHECK(ge("manager", "tilelink", "write") == 150);
  CHECK(ge("legalizer_state", "init", "read") == 21);
  CHECK(ge("manager", "init", "read") == 55);
  CHECK(area_column(ProtocolId::TileLinkUL) == area_column(ProtocolId::TileLinkUH));
  CHECK_THROWS_AS(AreaTable::builtin().cell("manager", "pcie", "read"), Error);
}

TEST_CASE("area table CSV round-trip") {
  const auto t = AreaTable::builtin();
  CHECK(AreaTable::from_csv(t.to_csv()) == t);
  CHECK_THROWS_AS(AreaTable::from_csv("a,b\n"), Error);
  std::ifstream in(std::string(IDMA_DATA_DIR) + "/area_table.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(AreaTable::from_csv(ss.str()) == t);
}

TEST_CASE("base configuration sums the table") {
  const auto a = estimate_area(axi_base());
  // base 6690 + axi read and write; maxima are taken per direction
  const double want = 6690 + (1400 + 1400) + (710 + 710) + (95 + 105) + (190 + 30) + (250 + 250);
  CHECK(a.total == Catch::Approx(want));
  CHECK(a.unit("legalizer_state") == Catch::Approx(1500 + 710 + 710));
  CHECK(a.unit("shifter") == Catch::Approx(120 + 250 + 250));
}

TEST_CASE("area scales linearly in each parameter") {
  auto c = axi_base();
  const double a16 = estimate_area(c).total;
  c.nax_read = c.nax_write = 32;
  const double a32 = estimate_area(c).total;
  c.nax_read = c.nax_write = 48;
  const double a48 = estimate_area(c).total;
  CHECK(a48 - a32 == Catch::Approx(a32 - a16));
  c = axi_base();
  c.dw = 64;
  const double d64 = estimate_area(c).total;
  c.dw = 128;
  CHECK(estimate_area(c).total - d64 == Catch::Approx(2 * (d64 - a16)));
}

TEST_CASE("per-direction maxima replace sums where flagged") {
  EngineConfig c;
  c.ports = {{ProtocolId::Axi, PortDirection::Read}, {ProtocolId::Obi, PortDirection::Read},
             {ProtocolId::Axi, PortDirection::Write}};
  const auto a = estimate_area(c);
  CHECK(a.unit("shifter") == Catch::Approx(120 + 250 + 250));
  CHECK(a.unit("manager") == Catch::Approx(70 + 190 + 60 + 30));
}

TEST_CASE("NNLS agrees with exhaustive support search") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 6 + static_cast<int>(rng() % 10);
    const int cols = 2 + static_cast<int>(rng() % 5);
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) a(i, j) = n01(rng);
      b(i) = n01(rng);
    }
    const auto got = fit_nnls(a, b);
    const auto want = oracle::nnls_enumerate(a, b);
    REQUIRE((a * got.x - b).norm() == Catch::Approx((a * want - b).norm()).epsilon(1e-9));
    REQUIRE((got.x.array() >= 0).all());
    REQUIRE(check_kkt(a, b, got.x).ok);
  }
}

TEST_CASE("NNLS edge cases") {
  Eigen::MatrixXd a(2, 3);
  a.setOnes();
  Eigen::VectorXd b(2);
  b.setOnes();
  try {
    fit_nnls(a, b);
    FAIL("expected Underdetermined");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Underdetermined);
  }
  Eigen::MatrixXd dup(4, 2);
  dup << 1, 1, 2, 2, 3, 3, 4, 4;
  Eigen::VectorXd y(4);
  y << 2, 4, 6, 8;
  const auto r = fit_nnls(dup, y);
  CHECK(r.x(0) == Catch::Approx(2.0));
  CHECK(r.x(1) == 0.0);
  CHECK(fit_nnls(dup, -y).x.isZero());
  Eigen::VectorXd bad(2);
  bad << -1, 0;
  CHECK_FALSE(check_kkt(dup, y, bad).ok);
}

TEST_CASE("timing model fit recovers its coefficients") {
  const auto truth = TimingModel::synthetic();
  std::mt19937_64 rng(12);
  std::vector<TimingSample> samples;
  for (int i = 0; i < 80; ++i) {
    EngineConfig c;
    c.dw = 8u << (rng() % 7);
    c.aw = 16 + static_cast<unsigned>(rng() % 49);
    c.nax_read = c.nax_write = 1u << (rng() % 7);
    for (auto p : kAllProtocols) {
      if (rng() % 2) c.ports.push_back({p, PortDirection::Read});
    }
    samples.push_back({c, estimate_timing(c, truth).longest_path_ns});
  }
  const auto fit = fit_timing(samples);
  CHECK((fit.coefficients() - truth.coefficients()).norm() < 1e-9);
  CHECK_THROWS_AS(estimate_timing(EngineConfig{}, TimingModel{}), Error);
  const auto e = estimate_timing(axi_base(), truth);
  CHECK(e.fmax_ghz == Catch::Approx(1.0 / e.longest_path_ns));
}

TEST_CASE("latency model") {
  auto c = axi_base();
  CHECK(latency_model(c) == 2);
  c.has_legalizer = false;
  CHECK(latency_model(c) == 1);
  CHECK(latency_model(c, {TensorNdSpec{3, true}, MpSplitSpec{}}) == 2);
}
