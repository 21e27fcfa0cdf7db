#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "albus/harness.hpp"

namespace albus {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.attack.n_bursts = 300;
  cfg.background.flow_rate = 1'000.0;
  cfg.memory_budget = 3'000;
  cfg.repeats = 2;
  return cfg;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(CellsForBudget, Examples) {
  EXPECT_EQ(cells_for_budget(300'000, MemoryLayout::lb_bc_pair), 18'750U);
  EXPECT_EQ(cells_for_budget(16, MemoryLayout::lb_bc_pair), 1U);
  EXPECT_EQ(cells_for_budget(300'000, MemoryLayout::lb_only), 33'333U);
  EXPECT_EQ(cells_for_budget(30'000, MemoryLayout::lb_bc_pair), 1'875U);
  EXPECT_THROW(cells_for_budget(15, MemoryLayout::lb_bc_pair), ConfigError);
  EXPECT_THROW(cells_for_budget(0, MemoryLayout::lb_only), ConfigError);
}

TEST(SketchWidth, FourByteCounters) {
  EXPECT_EQ(sketch_width_for_budget(300'000, 4), 18'750U);
  EXPECT_EQ(sketch_width_for_budget(30'000, 4), 1'875U);
  EXPECT_THROW(sketch_width_for_budget(15, 4), ConfigError);
  EXPECT_THROW(sketch_width_for_budget(100, 0), ConfigError);
}

TEST(Config, ParsesKeysAndComments) {
  std::istringstream in(
      "# comment\n"
      "detector = countsketch   # trailing\n"
      "memory_budget = 12000\n"
      "gamma = 250000\n"
      "beta = 10000\n"
      "\n"
      "threshold_factor = 0.5\n"
      "reset_mode = randomized\n"
      "repeats = 3\n"
      "seed = 42\n");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.detector, DetectorKind::countsketch);
  EXPECT_EQ(cfg.memory_budget, 12'000U);
  EXPECT_DOUBLE_EQ(cfg.spec.gamma(), 250'000.0);
  EXPECT_DOUBLE_EQ(cfg.spec.beta(), 10'000.0);
  EXPECT_DOUBLE_EQ(cfg.threshold_factor, 0.5);
  EXPECT_EQ(cfg.reset_mode, ResetMode::randomized);
  EXPECT_EQ(cfg.repeats, 3U);
  EXPECT_EQ(cfg.seed, 42U);
  EXPECT_EQ(cfg.sketch_width(), 750U);
}

TEST(Config, ProfileAppliesFirst) {
  std::istringstream in("memory_budget = 1600\nprofile = full\n");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.memory_budget, 1'600U);
  EXPECT_EQ(cfg.attack.n_bursts, 38'000U);
}

TEST(Config, Errors) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_THROW(parse("nope = 1\n"), ConfigError);
  EXPECT_THROW(parse("detector = bloom\n"), ConfigError);
  EXPECT_THROW(parse("repeats = 1.5\n"), ConfigError);
  EXPECT_THROW(parse("gamma = fast\n"), ConfigError);
  EXPECT_THROW(parse("gamma = 0\n"), ConfigError);
  EXPECT_THROW(parse("just words\n"), ConfigError);
  EXPECT_THROW(parse("sweep.axis = beta\n"), ConfigError);
  EXPECT_THROW(parse("profile = laptop\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/x.cfg"), ConfigError);
  try {
    parse("repeats = 2\nbad line\n");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
}

TEST(Config, Validation) {
  ExperimentConfig cfg;
  cfg.repeats = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.memory_budget = 10;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.background.kind = BackgroundKind::trace;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.attack.burst.width = 6.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NO_THROW(ExperimentConfig{}.validate());
}

TEST(ParamsHash, IgnoresSeedTracksParameters) {
  ExperimentConfig a;
  ExperimentConfig b;
  b.seed = 99;
  b.repeats = 1;
  EXPECT_EQ(params_hash(a), params_hash(b));
  b.rigidity = 1;
  EXPECT_NE(params_hash(a), params_hash(b));
  EXPECT_EQ(params_hash(a).size(), 16U);
}

TEST(Run, RowsPlusAggregate) {
  auto cfg = small_config();
  cfg.repeats = 6;
  const auto res = run(cfg);
  ASSERT_EQ(res.rows.size(), 6U);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(res.rows[i].seed, cfg.seed + i);
    EXPECT_GT(res.rows[i].packets, 0U);
  }
  std::ostringstream os;
  write_csv(os, res);
  EXPECT_EQ(line_count(os.str()), 1U + 6U + 1U);
  EXPECT_NE(os.str().find(",aggregate,"), std::string::npos);
}

TEST(Run, AlbusAttackOnlyIsPrecise) {
  auto cfg = small_config();
  cfg.background.kind = BackgroundKind::none;
  cfg.repeats = 3;
  const auto res = run(cfg);
  EXPECT_DOUBLE_EQ(res.aggregate.precision.mean, 1.0);
  EXPECT_DOUBLE_EQ(res.aggregate.precision.std, 0.0);
  for (const auto& row : res.rows) EXPECT_EQ(row.events, 300U);
}

TEST(Run, DeterministicAcrossThreadCounts) {
  auto cfg = small_config();
  cfg.repeats = 3;
  cfg.threads = 1;
  const auto a = run(cfg);
  cfg.threads = 3;
  const auto b = run(cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.rows[i].match.tp, b.rows[i].match.tp);
    EXPECT_EQ(a.rows[i].match.fp, b.rows[i].match.fp);
    EXPECT_EQ(a.rows[i].match.fn, b.rows[i].match.fn);
    EXPECT_EQ(a.rows[i].score.f1, b.rows[i].score.f1);
    EXPECT_EQ(a.rows[i].packets, b.rows[i].packets);
  }
}

TEST(Run, EveryDetectorRuns) {
  for (auto kind : {DetectorKind::albus, DetectorKind::albus_nobc, DetectorKind::countmin, DetectorKind::countsketch}) {
    auto cfg = small_config();
    cfg.detector = kind;
    cfg.repeats = 1;
    const auto res = run(cfg);
    EXPECT_EQ(res.rows[0].detector, to_string(kind));
    EXPECT_GT(res.rows[0].updates_per_s, 0.0);
  }
}

TEST(Run, BackgroundFromTrace) {
  const auto path = (std::filesystem::temp_directory_path() / "albus_harness_bg.csv").string();
  write_trace(path, gen_constant_background(10, 125'000.0, 5.0, 1000, 1));
  auto cfg = small_config();
  cfg.repeats = 1;
  cfg.background.kind = BackgroundKind::trace;
  cfg.background.trace_path = path;
  const auto res = run(cfg);
  EXPECT_EQ(res.rows[0].packets, 300U * 85U + 10U * 625U);
  std::filesystem::remove(path);
  EXPECT_THROW(run(cfg), TraceError);
}

TEST(Sweep, ParseAndRun) {
  std::istringstream in(
      "n_bursts = 200\nbackground = none\nrepeats = 1\n"
      "sweep.axis = overuse_ratio\nsweep.values = 1.1, 2.0\n");
  const auto spec = parse_sweep(in);
  EXPECT_EQ(spec.axis, "overuse_ratio");
  ASSERT_EQ(spec.values.size(), 2U);
  const auto res = sweep(spec);
  ASSERT_EQ(res.points.size(), 2U);
  EXPECT_LE(res.points[0].result.aggregate.recall.mean, res.points[1].result.aggregate.recall.mean);
  std::ostringstream os;
  write_csv(os, res);
  EXPECT_EQ(line_count(os.str()), 1U + 2U * 2U);
  EXPECT_NE(os.str().find("overuse_ratio,2.0,albus"), std::string::npos);
}

TEST(Sweep, SingleValueEqualsRun) {
  auto base = small_config();
  base.repeats = 1;
  SweepSpec spec{base, "rigidity", {"1"}};
  const auto swept = sweep(spec);
  base.rigidity = 1;
  const auto single = run(base);
  ASSERT_EQ(swept.points.size(), 1U);
  const auto& row = swept.points[0].result.rows[0];
  EXPECT_EQ(row.params_hash, single.rows[0].params_hash);
  EXPECT_EQ(row.match.tp, single.rows[0].match.tp);
  EXPECT_EQ(row.match.fp, single.rows[0].match.fp);
}

TEST(Sweep, Errors) {
  std::istringstream missing_axis("sweep.values = 1\n");
  EXPECT_THROW(parse_sweep(missing_axis), ConfigError);
  std::istringstream missing_values("sweep.axis = beta\n");
  EXPECT_THROW(parse_sweep(missing_values), ConfigError);
  SweepSpec bad{small_config(), "colour", {"red"}};
  EXPECT_THROW(sweep(bad), ConfigError);
}

TEST(Output, JsonCarriesSchemaAndAccounting) {
  auto cfg = small_config();
  cfg.repeats = 2;
  const auto j = to_json(run(cfg));
  EXPECT_EQ(j["runs"].size(), 2U);
  for (const char* key : {"detector", "params_hash", "seed", "recall", "precision", "f1", "tp", "fp", "fn",
                          "runtime_s", "updates_per_s"}) {
    EXPECT_TRUE(j["runs"][0].contains(key)) << key;
  }
  EXPECT_EQ(j["memory_accounting"], "187 LB-BC pairs x 16 B");
  EXPECT_TRUE(j["aggregate"]["recall"].contains("std"));

  cfg.detector = DetectorKind::countmin;
  EXPECT_EQ(accounting_note(cfg), "4 rows x 187 counters x 4 B");
}

}  // namespace
}  // namespace albus
