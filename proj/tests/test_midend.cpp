// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <map>
#include <random>

#include "idma/midend.hpp"
#include "oracles.hpp"

using namespace idma;

namespace {

NdTransferDescriptor random_nd(std::mt19937_64& rng) {
  NdTransferDescriptor d;
  d.base.src_addr = 0x100000 + rng() % 0x1000;
  d.base.dst_addr = 0x800000 + rng() % 0x1000;
  d.base.length = 1 + rng() % 64;
  const auto n = rng() % 4;
  for (std::uint64_t k = 0; k < n; ++k) {
    d.dims.push_back({static_cast<std::int64_t>(rng() % 512) - 256,
                      static_cast<std::int64_t>(rng() % 512) - 256, 1 + rng() % 5});
  }
  return d;
}

}  // namespace

TEST_CASE("ND expansion matches plain nested loops") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto d = random_nd(rng);
    const auto got = expand_nd(d, 32);
    const auto want = oracle::nd_loops(d);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      REQUIRE(got[k].src_addr == want[k].src);
      REQUIRE(got[k].dst_addr == want[k].dst);
      REQUIRE(got[k].length == want[k].len);
    }
  }
}

TEST_CASE("ND iterator is lazy and counts") {
  NdTransferDescriptor d;
  d.base.length = 4;
  d.dims = {{4, 8, 1000}, {100000, 100000, 1000}};
  NdIterator it(d);
  CHECK(it.count() == 1'000'000);
  CHECK(it.next().src_addr == 0);
  CHECK(it.next().dst_addr == 8);
  CHECK(it.emitted() == 2);
}

TEST_CASE("ND bounds") {
  NdTransferDescriptor d;
  d.base = {0x10, 0x10, 16, ProtocolId::Axi, ProtocolId::Axi, {}};
  d.dims = {{-0x20, 0, 2}};
  CHECK_THROWS_AS(check_nd_bounds(d, 32), Error);
  d.dims = {{0x1000, 0x1000, 0x10000}};
  CHECK_THROWS_AS(check_nd_bounds(d, 16), Error);
  CHECK_NOTHROW(check_nd_bounds(d, 32));
  d.dims = {{0, 0, 0}};
  try {
    check_nd_bounds(d, 32);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidArgument);
  }
}

TEST_CASE("2D interface") {
  Transfer2D t;
  t.src_addr = 0x1000;
  t.dst_addr = 0x2000;
  t.total_length = 64;
  t.length_1d = 16;
  t.src_stride = 32;
  t.dst_stride = 16;
  const auto pieces = expand_2d(t);
  REQUIRE(pieces.size() == 4);
  CHECK(pieces[3].src_addr == 0x1000 + 96);
  CHECK(pieces[3].dst_addr == 0x2000 + 48);
  t.total_length = 65;
  CHECK_THROWS_AS(to_nd(t), Error);
  t.length_1d = 0;
  CHECK_THROWS_AS(to_nd(t), Error);
}

TEST_CASE("split matches a byte-wise boundary walk") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    TransferDescriptor1D d;
    d.src_addr = rng() % 0x10000;
    d.dst_addr = rng() % 0x10000;
    d.length = 1 + rng() % 3000;
    const auto boundary = std::uint64_t{1} << (rng() % 11);
    const auto side = (i % 2) ? SplitSide::Src : SplitSide::Dst;
    const auto got = split_at_boundary(d, boundary, side);
    const auto want =
        oracle::boundary_walk(side == SplitSide::Src ? d.src_addr : d.dst_addr, d.length, boundary);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      REQUIRE((side == SplitSide::Src ? got[k].src_addr : got[k].dst_addr) == want[k].first);
      REQUIRE(got[k].length == want[k].second);
      REQUIRE(got[k].dst_addr - d.dst_addr == got[k].src_addr - d.src_addr);
    }
  }
}

TEST_CASE("split argument checks") {
  TransferDescriptor1D d;
  d.length = 10;
  CHECK_THROWS_AS(split_at_boundary(d, 24, SplitSide::Dst), Error);
  d.length = 0;
  CHECK(split_at_boundary(d, 16, SplitSide::Dst).size() == 1);
}

TEST_CASE("distribution by address and by tree agree") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    TransferDescriptor1D d;
    d.src_addr = rng() % 0x100000;
    d.dst_addr = rng() % 0x100000;
    d.length = 1 + rng() % 20000;
    const std::uint64_t boundary = 1024;
    const auto pieces = split_at_boundary(d, boundary, SplitSide::Dst);
    for (unsigned levels : {1u, 2u, 3u}) {
      const auto flat = distribute(pieces, std::size_t{1} << levels, boundary, SplitSide::Dst);
      const auto tree = distribute_tree(pieces, levels, boundary, SplitSide::Dst);
      REQUIRE(flat == tree);
      for (std::size_t port = 0; port < flat.size(); ++port) {
        for (const auto& p : flat[port]) REQUIRE((p.dst_addr / boundary) % flat.size() == port);
      }
    }
  }
}

TEST_CASE("distribution rejects pieces crossing a line") {
  TransferDescriptor1D d{0, 1000, 100, ProtocolId::Axi, ProtocolId::Axi, {}};
  const TransferDescriptor1D one[] = {d};
  try {
    distribute(one, 2, 1024, SplitSide::Dst);
    FAIL("expected UnsplitPiece");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnsplitPiece);
  }
}

TEST_CASE("round-robin distribution") {
  std::vector<TransferDescriptor1D> pieces(7);
  const auto out = distribute(pieces, 3, 64, SplitSide::Dst, DistPolicy::RoundRobin);
  CHECK(out[0].size() == 3);
  CHECK(out[1].size() == 2);
  CHECK(out[2].size() == 2);
}

// Event-order oracle: replays the arbitration rules on a cycle loop of its
// own and compares the resulting (cycle, source) sequence.
TEST_CASE("rt arbiter schedule follows the arbitration rules") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    RtConfig cfg;
    cfg.shape.base.length = 8;
    cfg.shape.dims = {{8, 8, 1 + rng() % 4}, {64, 64, 1 + rng() % 3}};
    cfg.period = 1 + rng() % 20;
    cfg.num_launches = rng() % 5;
    cfg.start = rng() % 10;
    std::vector<BypassRequest> bypass;
    const auto n_bypass = rng() % 4;
    for (std::uint64_t b = 0; b < n_bypass; ++b) {
      NdTransferDescriptor d;
      d.base.length = 4;
      d.dims = {{4, 4, 1 + rng() % 5}};
      bypass.push_back({rng() % 40, d, 100 + b});
    }
    const auto events = rt_schedule(cfg, bypass, 1000);

    // reference
    struct Ref {
      Cycle c;
      bool periodic;
      std::uint64_t index;
    };
    std::vector<Ref> want;
    auto byp = bypass;
    std::stable_sort(byp.begin(), byp.end(), [](auto& a, auto& b) { return a.arrival < b.arrival; });
    std::uint64_t launched = 0;
    std::size_t bi = 0;
    Cycle now = 0;
    const auto per = cfg.shape.count();
    while (now < 1000) {
      const bool due = launched < *cfg.num_launches && now >= cfg.start + launched * cfg.period;
      if (due) {
        for (std::uint64_t k = 0; k < per; ++k) want.push_back({now++, true, launched});
        ++launched;
      } else if (bi < byp.size() && byp[bi].arrival <= now) {
        for (std::uint64_t k = 0; k < byp[bi].desc.count(); ++k) want.push_back({now++, false, byp[bi].tag});
        ++bi;
      } else {
        ++now;
      }
    }
    REQUIRE(events.size() == want.size());
    for (std::size_t k = 0; k < events.size(); ++k) {
      REQUIRE(events[k].cycle == want[k].c);
      REQUIRE(events[k].periodic == want[k].periodic);
      REQUIRE(events[k].index == want[k].index);
    }
  }
}

TEST_CASE("rt periodic launches are never preempted and stop when disabled") {
  RtConfig cfg;
  cfg.shape.base.length = 4;
  cfg.shape.dims = {{4, 4, 3}};
  cfg.period = 2;
  cfg.num_launches = 2;
  RtArbiter arb(cfg);
  std::vector<RtEvent> ev;
  for (Cycle c = 0; c < 20; ++c) {
    if (auto e = arb.tick(c)) ev.push_back(*e);
  }
  REQUIRE(ev.size() == 6);
  CHECK(ev[0].first);
  CHECK(ev[2].last);
  CHECK(ev[3].cycle == 3);  // second launch was due at 2, waited for the first
  CHECK(arb.finished());
  cfg.enabled = false;
  RtArbiter off(cfg);
  CHECK(off.finished());
  CHECK_FALSE(off.tick(0));
  cfg.period = 0;
  CHECK_THROWS_AS(RtArbiter(cfg), Error);
}

TEST_CASE("mid-end latencies") {
  CHECK(midend_latency(TensorNdSpec{3, false}) == 1);
  CHECK(midend_latency(TensorNdSpec{3, true}) == 0);
  CHECK(midend_latency(MpSplitSpec{}) == 1);
  CHECK(midend_latency(MpDistSpec{}) == 1);
  CHECK(midend_latency(Rt3dSpec{}) == 1);
  CHECK(midend_name(Tensor2dSpec{}) == "tensor_2d");
}
