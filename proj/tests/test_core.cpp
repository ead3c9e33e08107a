// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "idma/core.hpp"

using namespace idma;

namespace {

EngineConfig axi_rw() {
  EngineConfig c;
  c.ports = {{ProtocolId::Axi, PortDirection::ReadWrite}};
  return c;
}

bool has(const ConfigCheck& c, Errc code) {
  for (const auto& v : c.violations) {
    if (v.code == code) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("protocol names round-trip") {
  for (auto p : kAllProtocols) {
    REQUIRE(parse_protocol(protocol_name(p)) == p);
  }
  REQUIRE_FALSE(parse_protocol("pcie"));
  REQUIRE(parse_direction("rw") == PortDirection::ReadWrite);
  REQUIRE(parse_error_action("replay") == ErrorAction::Replay);
  REQUIRE_FALSE(parse_error_action("retry"));
}

TEST_CASE("a minimal config validates") {
  const auto c = validate_config(axi_rw());
  REQUIRE(c.ok());
  REQUIRE(c.violations.empty());
  REQUIRE(c.config->get() == axi_rw());
}

TEST_CASE("validation reports every violation at once") {
  EngineConfig c;
  c.aw = 8;
  c.dw = 24;
  c.nax_read = 0;
  c.buffer_depth = 0;
  const auto r = validate_config(c);
  REQUIRE_FALSE(r.ok());
  CHECK(has(r, Errc::InvalidWidth));
  CHECK(has(r, Errc::ZeroCapacity));
  CHECK(has(r, Errc::NoReadPort));
  CHECK(has(r, Errc::NoWritePort));
  CHECK(r.violations.size() >= 5);
}

TEST_CASE("port list rules") {
  SECTION("duplicate direction") {
    auto c = axi_rw();
    c.ports.push_back({ProtocolId::Axi, PortDirection::Read});
    CHECK(has(validate_config(c), Errc::DuplicatePort));
  }
  SECTION("same protocol split across directions is fine") {
    EngineConfig c;
    c.ports = {{ProtocolId::Obi, PortDirection::Read}, {ProtocolId::Obi, PortDirection::Write}};
    CHECK(validate_config(c).ok());
  }
  SECTION("init cannot write") {
    EngineConfig c;
    c.ports = {{ProtocolId::Init, PortDirection::ReadWrite}, {ProtocolId::Axi, PortDirection::Write}};
    CHECK(has(validate_config(c), Errc::UnsupportedDirection));
  }
  SECTION("init alone has nothing to write to") {
    EngineConfig c;
    c.ports = {{ProtocolId::Init, PortDirection::Read}};
    CHECK(has(validate_config(c), Errc::NoWritePort));
  }
}

TEST_CASE("width bounds") {
  for (unsigned dw : {8u, 16u, 32u, 64u, 128u, 256u, 512u, 1024u}) {
    auto c = axi_rw();
    c.dw = dw;
    CHECK(validate_config(c).ok());
  }
  for (unsigned dw : {0u, 4u, 48u, 2048u}) {
    auto c = axi_rw();
    c.dw = dw;
    CHECK(has(validate_config(c), Errc::InvalidWidth));
  }
  auto c = axi_rw();
  c.aw = 65;
  CHECK_THROWS_AS(require_valid(c), Error);
}

TEST_CASE("descriptor checks") {
  auto cfg = axi_rw();
  TransferDescriptor1D d{0xFFFF'F000, 0, 0x1000, ProtocolId::Axi, ProtocolId::Axi, {}};
  REQUIRE_NOTHROW(check_descriptor(d, cfg));
  d.length = 0x1001;
  try {
    check_descriptor(d, cfg);
    FAIL("expected AddressOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AddressOutOfRange);
  }
  d.length = 16;
  d.options.user_burst_cap = 2;
  CHECK_THROWS_AS(check_descriptor(d, cfg), Error);
  d.options.user_burst_cap.reset();
  d.dst_protocol = ProtocolId::Obi;
  CHECK_THROWS_AS(check_descriptor(d, cfg), Error);
}

TEST_CASE("address limit saturates at 64 bits") {
  CHECK(address_limit(32) == 0x1'0000'0000ull);
  CHECK(address_limit(64) == ~0ull);
}

TEST_CASE("ND sizes") {
  NdTransferDescriptor d;
  d.base.length = 12;
  d.dims = {{16, 16, 3}, {256, 64, 5}};
  CHECK(d.count() == 15);
  CHECK(d.total_bytes() == 180);
}

TEST_CASE("contract violations are classified") {
  CHECK(is_contract_violation(Errc::Deadlock));
  CHECK(is_contract_violation(Errc::CapacityExceeded));
  CHECK(is_contract_violation(Errc::ContractViolation));
  CHECK_FALSE(is_contract_violation(Errc::ConfigError));
  CHECK(to_string(Errc::UnsplitPiece) == "UnsplitPiece");
}
