#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "albus/leaky_bucket.hpp"
#include "albus/traffic.hpp"

namespace albus {
namespace {

namespace fs = std::filesystem;

std::uint64_t total_bytes(const std::vector<Packet>& ps) {
  return std::accumulate(ps.begin(), ps.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const Packet& p) { return acc + p.size; });
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("albus_traffic_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

TEST(GenBurst, BaseParameters) {
  const BurstParams bp;
  EXPECT_DOUBLE_EQ(bp.volume(), 85'000.0);
  EXPECT_NEAR(bp.volume() / bp.width * 8.0, 3.4e6, 1e-6);
  const auto train = gen_burst(FlowId{1}, 2.0, bp);
  ASSERT_EQ(train.size(), 85U);
  EXPECT_EQ(total_bytes(train), 85'000U);
  EXPECT_DOUBLE_EQ(train.front().ts, 2.0);
  EXPECT_DOUBLE_EQ(train.back().ts, 2.2);
  const double gap = 0.2 / 84.0;
  for (std::size_t k = 1; k < train.size(); ++k) {
    EXPECT_NEAR(train[k].ts - train[k - 1].ts, gap, 1e-12);
    EXPECT_EQ(train[k].flow, FlowId{1});
  }
}

TEST(GenBurst, RemainderPacketComesLast) {
  BurstParams bp;
  bp.packet_size = 1500;
  const auto train = gen_burst(FlowId{1}, 0.0, bp);
  ASSERT_EQ(train.size(), 57U);  // 56 x 1500 + 1000
  EXPECT_EQ(train.back().size, 1000U);
  EXPECT_EQ(total_bytes(train), 85'000U);
  for (const auto& p : train) {
    EXPECT_GE(p.ts, 0.0);
    EXPECT_LE(p.ts, 0.2);
  }
}

TEST(GenBurst, TinyVolumeIsOnePacket) {
  BurstParams bp;
  bp.spec = FlowSpec(100.0, 10.0);
  bp.width = 1.0;
  bp.overuse_ratio = 2.0;
  const auto train = gen_burst(FlowId{3}, 1.0, bp);
  ASSERT_EQ(train.size(), 1U);
  EXPECT_EQ(train[0].size, 120U);
}

TEST(GenBurst, RejectsInvalidParams) {
  BurstParams bp;
  bp.width = 0.0;
  EXPECT_THROW(gen_burst(FlowId{1}, 0.0, bp), ContractViolation);
  bp = {};
  bp.overuse_ratio = 0.0;
  EXPECT_THROW(gen_burst(FlowId{1}, 0.0, bp), ContractViolation);
}

TEST(GenBurst, OveruseBetweenOneAndTwoIsASingleViolation) {
  for (double l : {1.01, 1.05, 1.2, 1.5, 1.9}) {
    for (double w : {0.05, 0.2, 0.5}) {
      BurstParams bp;
      bp.overuse_ratio = l;
      bp.width = w;
      const auto events = oracle_events(gen_burst(FlowId{1}, 0.0, bp), bp.spec);
      EXPECT_EQ(events.size(), 1U) << "l=" << l << " w=" << w;
    }
  }
  // Past l = 2 the excess left after the first reset exceeds beta again.
  for (double l : {2.5, 3.0}) {
    BurstParams bp;
    bp.overuse_ratio = l;
    EXPECT_EQ(oracle_events(gen_burst(FlowId{1}, 0.0, bp), bp.spec).size(), 2U) << "l=" << l;
  }
  for (double l : {0.5, 0.9}) {
    BurstParams bp;
    bp.overuse_ratio = l;
    EXPECT_TRUE(oracle_events(gen_burst(FlowId{1}, 0.0, bp), bp.spec).empty());
  }
}

TEST(GenAttack, EmptyWhenNoBursts) {
  AttackConfig cfg;
  cfg.n_bursts = 0;
  const auto trace = gen_attack(cfg);
  EXPECT_TRUE(trace.packets.empty());
  EXPECT_TRUE(trace.labels.empty());
}

TEST(GenAttack, StructureAndRate) {
  AttackConfig cfg;
  cfg.n_bursts = 3800;
  cfg.seed = 5;
  const auto trace = gen_attack(cfg);
  ASSERT_EQ(trace.labels.size(), 3800U);
  EXPECT_TRUE(std::is_sorted(trace.packets.begin(), trace.packets.end(),
                             [](const Packet& a, const Packet& b) { return a.ts < b.ts; }));
  std::set<std::uint64_t> ids;
  std::unordered_map<std::uint64_t, const BurstLabel*> by_flow;
  for (const auto& l : trace.labels) {
    EXPECT_GE(l.start, 0.0);
    EXPECT_LE(l.start, cfg.observation - cfg.burst.width);
    ids.insert(l.flow.value);
    by_flow[l.flow.value] = &l;
  }
  EXPECT_EQ(ids.size(), 3800U);
  for (const auto& p : trace.packets) {
    const BurstLabel* l = by_flow.at(p.flow.value);
    ASSERT_GE(p.ts, l->start);
    ASSERT_LE(p.ts, l->start + l->width + 1e-12);
  }
  const double gbps = static_cast<double>(total_bytes(trace.packets)) * 8.0 / cfg.observation / 1e9;
  EXPECT_NEAR(gbps, 0.5168, 1e-9);
  EXPECT_EQ(oracle_events(trace.packets, cfg.burst.spec).size(), 3800U);
}

TEST(GenAttack, PreservesPerFlowOrder) {
  AttackConfig cfg;
  cfg.n_bursts = 200;
  cfg.seed = 8;
  const auto trace = gen_attack(cfg);
  std::unordered_map<std::uint64_t, std::vector<Packet>> per_flow;
  for (const auto& p : trace.packets) per_flow[p.flow.value].push_back(p);
  for (const auto& l : trace.labels) {
    EXPECT_EQ(per_flow.at(l.flow.value), gen_burst(l.flow, l.start, cfg.burst));
  }
}

TEST(GenAttack, DeterministicUnderSeed) {
  AttackConfig cfg;
  cfg.n_bursts = 100;
  cfg.seed = 3;
  const auto a = gen_attack(cfg);
  const auto b = gen_attack(cfg);
  EXPECT_EQ(a.packets, b.packets);
  EXPECT_EQ(a.labels, b.labels);
  cfg.seed = 4;
  EXPECT_NE(gen_attack(cfg).labels, a.labels);
}

TEST(GenAttack, RejectsWidthBeyondObservation) {
  AttackConfig cfg;
  cfg.observation = 0.1;
  EXPECT_THROW(gen_attack(cfg), ContractViolation);
}

TEST(ConstantBackground, OneFlowOneSecond) {
  const auto bg = gen_constant_background(1, 125'000.0, 1.0, 1000, 1);
  ASSERT_EQ(bg.size(), 125U);
  for (std::size_t k = 1; k < bg.size(); ++k) EXPECT_NEAR(bg[k].ts - bg[k - 1].ts, 0.008, 1e-12);
  EXPECT_GE(bg.front().ts, 0.0);
  EXPECT_LT(bg.front().ts, 0.008);
}

TEST(ConstantBackground, DistinctFlowsAndNoViolations) {
  const auto bg = gen_constant_background(1000, 125'000.0, 0.5, 1000, 2);
  std::set<std::uint64_t> ids;
  for (const auto& p : bg) ids.insert(p.flow.value);
  EXPECT_EQ(ids.size(), 1000U);
  EXPECT_TRUE(oracle_events(bg, FlowSpec(125'000.0, 1000.0)).empty());
  EXPECT_THROW(gen_constant_background(1, 0.0, 1.0, 1000, 1), ContractViolation);
}

TEST(ShortFlows, SmallFlowsNeverViolate) {
  ShortFlowParams p;
  p.flow_rate = 2000.0;
  const auto bg = gen_short_flows(p, 1);
  EXPECT_TRUE(std::is_sorted(bg.begin(), bg.end(), [](const Packet& a, const Packet& b) { return a.ts < b.ts; }));
  std::unordered_map<std::uint64_t, int> per_flow;
  for (const auto& pk : bg) {
    ++per_flow[pk.flow.value];
    ASSERT_LT(pk.ts, p.duration);
  }
  // About flow_rate * duration flows with mean_packets packets each.
  EXPECT_NEAR(static_cast<double>(per_flow.size()), 10'000.0, 400.0);
  EXPECT_NEAR(static_cast<double>(bg.size()) / per_flow.size(), 5.0, 0.3);
  EXPECT_TRUE(oracle_events(bg, FlowSpec()).empty());
  EXPECT_EQ(gen_short_flows(p, 1), bg);
}

TEST(ShortFlows, ZeroRateIsEmpty) {
  ShortFlowParams p;
  p.flow_rate = 0.0;
  EXPECT_TRUE(gen_short_flows(p, 1).empty());
}

TEST(MergeTraces, SortedAndComplete) {
  const std::vector<Packet> a{{FlowId{1}, 1, 0.0}, {FlowId{1}, 1, 2.0}};
  const std::vector<Packet> b{{FlowId{2}, 1, 1.0}, {FlowId{2}, 1, 2.0}};
  const auto m = merge_traces(a, b);
  ASSERT_EQ(m.size(), 4U);
  EXPECT_EQ(m[1].flow, FlowId{2});
  EXPECT_EQ(m[2].flow, FlowId{1});  // tie: a first
}

TEST_F(TempDir, ParsesSingleRow) {
  write("one.csv", "0,17,1000\n");
  const auto t = read_trace(path("one.csv"));
  ASSERT_EQ(t.size(), 1U);
  EXPECT_EQ(t[0], (Packet{FlowId{17}, 1000, 0.0}));
}

TEST_F(TempDir, RoundTrip) {
  AttackConfig cfg;
  cfg.n_bursts = 30;
  cfg.seed = 2;
  auto trace = gen_attack(cfg);
  // Quantize to nanoseconds so the round trip is exact.
  for (auto& p : trace.packets) p.ts = detail::from_ns(detail::to_ns(p.ts));
  write_trace(path("t.csv"), trace.packets);
  EXPECT_EQ(read_trace(path("t.csv")), trace.packets);

  write_labels(path("l.csv"), trace.labels);
  const auto labels = read_labels(path("l.csv"));
  ASSERT_EQ(labels.size(), trace.labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    EXPECT_EQ(labels[i].flow, trace.labels[i].flow);
    EXPECT_NEAR(labels[i].start, trace.labels[i].start, 1e-9);
    EXPECT_NEAR(labels[i].width, 0.2, 1e-9);
    EXPECT_DOUBLE_EQ(labels[i].overuse_ratio, 1.2);
  }
}

TEST_F(TempDir, OutOfOrderRowNamesLine) {
  write("bad.csv", "ts_ns,flow_id,size_bytes\n100,1,10\n200,1,10\n150,2,10\n");
  try {
    (void)read_trace(path("bad.csv"));
    FAIL() << "expected TraceError";
  } catch (const TraceError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv:4"), std::string::npos) << e.what();
  }
}

TEST_F(TempDir, MalformedRows) {
  write("fields.csv", "1,2\n");
  EXPECT_THROW(read_trace(path("fields.csv")), TraceError);
  write("num.csv", "1,x,3\n");
  EXPECT_THROW(read_trace(path("num.csv")), TraceError);
  write("neg.csv", "-1,1,3\n");
  EXPECT_THROW(read_trace(path("neg.csv")), TraceError);
  write("zero.csv", "1,1,0\n");
  EXPECT_THROW(read_trace(path("zero.csv")), TraceError);
  write("big.csv", "1,1,4294967296\n");
  EXPECT_THROW(read_trace(path("big.csv")), TraceError);
  EXPECT_THROW(read_trace(path("missing.csv")), TraceError);
}

TEST_F(TempDir, ToleratesCrlfAndBlankLines) {
  write("crlf.csv", "ts_ns,flow_id,size_bytes\r\n5,1,10\r\n\r\n7, 2 ,20\r\n");
  const auto t = read_trace(path("crlf.csv"));
  ASSERT_EQ(t.size(), 2U);
  EXPECT_EQ(t[1], (Packet{FlowId{2}, 20, 7e-9}));
}

}  // namespace
}  // namespace albus
