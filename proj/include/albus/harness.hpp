#pragma once

// Experiment driver: configuration files, memory budgeting, seeded repeated
// runs, single-axis sweeps and result serialization.
//
// Configuration files are `key = value` lines; `#` starts a comment. A
// `profile` key is applied before all other keys regardless of position.
// Sweep files additionally carry `sweep.axis` and `sweep.values`
// (comma-separated). See README.md for the key list.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "albus/albus.hpp"
#include "albus/core.hpp"
#include "albus/metrics.hpp"
#include "albus/sketches.hpp"
#include "albus/traffic.hpp"

namespace albus {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Memory accounting

enum class MemoryLayout { lb_bc_pair, lb_only };

// 3 B flow id + 4 B timestamp + 2 B count per LB, 3 B flow id + 2 B count per
// BC: 14 B, padded to 16 B per pair. A bare LB is 9 B, unpadded.
inline constexpr std::size_t kBytesPerPair = 16;
inline constexpr std::size_t kBytesPerBareLb = 9;
inline constexpr std::size_t kBytesPerSketchCounter = 4;

inline std::size_t cells_for_budget(std::size_t budget, MemoryLayout layout) {
  const std::size_t unit = layout == MemoryLayout::lb_bc_pair ? kBytesPerPair : kBytesPerBareLb;
  const std::size_t cells = budget / unit;
  if (cells == 0) {
    throw ConfigError("memory budget of " + std::to_string(budget) + " B holds no cell (" + std::to_string(unit) +
                      " B each)");
  }
  return cells;
}

inline std::size_t sketch_width_for_budget(std::size_t budget, std::size_t depth) {
  if (depth == 0) throw ConfigError("sketch depth must be >= 1");
  const std::size_t width = budget / (kBytesPerSketchCounter * depth);
  if (width == 0) throw ConfigError("memory budget too small for sketch depth " + std::to_string(depth));
  return width;
}

// ---------------------------------------------------------------------------
// Configuration

enum class DetectorKind { albus, albus_nobc, countmin, countsketch };
enum class BackgroundKind { none, short_flows, constant, trace };

inline std::string_view to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::albus: return "albus";
    case DetectorKind::albus_nobc: return "albus_nobc";
    case DetectorKind::countmin: return "countmin";
    case DetectorKind::countsketch: return "countsketch";
  }
  return "?";
}

inline std::string_view to_string(BackgroundKind k) {
  switch (k) {
    case BackgroundKind::none: return "none";
    case BackgroundKind::short_flows: return "short_flows";
    case BackgroundKind::constant: return "constant";
    case BackgroundKind::trace: return "trace";
  }
  return "?";
}

inline std::string_view to_string(FidelityMode m) { return m == FidelityMode::prose ? "prose" : "literal"; }
inline std::string_view to_string(ResetMode m) { return m == ResetMode::fixed ? "static" : "randomized"; }

struct BackgroundConfig {
  BackgroundKind kind = BackgroundKind::short_flows;
  // short_flows
  double flow_rate = 10'000.0;
  double mean_packets = 5.0;
  double mean_gap = 0.05;
  // constant
  std::size_t flows = 500;
  double rate = 0.0;  // bytes/s; 0 means the spec's gamma
  std::uint32_t packet_size = 1000;
  std::string trace_path;
};

struct ExperimentConfig {
  DetectorKind detector = DetectorKind::albus;
  std::size_t memory_budget = 30'000;
  FlowSpec spec;
  AttackConfig attack;
  BackgroundConfig background;

  double push_threshold = 10'000.0;
  unsigned rigidity = 0;
  FidelityMode fidelity = FidelityMode::prose;

  std::size_t depth = 4;
  double threshold_factor = 1.0;
  double reset_period = 0.2;
  ResetMode reset_mode = ResetMode::fixed;

  std::size_t repeats = 6;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency

  bool is_albus() const noexcept {
    return detector == DetectorKind::albus || detector == DetectorKind::albus_nobc;
  }

  std::size_t cells() const {
    return cells_for_budget(memory_budget, detector == DetectorKind::albus_nobc ? MemoryLayout::lb_only
                                                                                 : MemoryLayout::lb_bc_pair);
  }

  std::size_t sketch_width() const { return sketch_width_for_budget(memory_budget, depth); }

  void validate() const {
    if (repeats == 0) throw ConfigError("repeats must be >= 1");
    if (!(attack.observation > 0.0)) throw ConfigError("observation must be positive");
    if (attack.n_bursts > 0 && attack.burst.width > attack.observation) {
      throw ConfigError("burst_width exceeds observation");
    }
    if (!(attack.burst.width > 0.0)) throw ConfigError("burst_width must be positive");
    if (!(attack.burst.overuse_ratio > 0.0)) throw ConfigError("overuse_ratio must be positive");
    if (attack.burst.packet_size == 0) throw ConfigError("packet_size must be positive");
    if (background.kind == BackgroundKind::trace && background.trace_path.empty()) {
      throw ConfigError("background = trace requires background_trace");
    }
    if (background.kind == BackgroundKind::constant && background.packet_size == 0) {
      throw ConfigError("background_packet_size must be positive");
    }
    if (background.rate < 0.0) throw ConfigError("background_rate must be non-negative");
    if (background.kind == BackgroundKind::short_flows) {
      if (background.flow_rate < 0.0) throw ConfigError("background_flow_rate must be non-negative");
      if (background.mean_packets < 1.0) throw ConfigError("background_mean_packets must be >= 1");
      if (!(background.mean_gap > 0.0)) throw ConfigError("background_mean_gap must be positive");
    }
    if (is_albus()) {
      (void)cells();
      if (!(push_threshold > 0.0)) throw ConfigError("push_threshold must be positive");
      if (rigidity > 300) throw ConfigError("rigidity must be <= 300");
    } else {
      (void)sketch_width();
      if (!(threshold_factor > 0.0)) throw ConfigError("threshold_factor must be positive");
      if (!(reset_period > 0.0)) throw ConfigError("reset_period must be positive");
    }
  }
};

inline void apply_profile(ExperimentConfig& cfg, std::string_view profile) {
  if (profile == "desk") {
    cfg.attack.n_bursts = 3800;
    cfg.memory_budget = 30'000;
    cfg.background.flow_rate = 10'000.0;
    cfg.background.flows = 500;
  } else if (profile == "full") {
    cfg.attack.n_bursts = 38'000;
    cfg.memory_budget = 300'000;
    cfg.background.flow_rate = 100'000.0;
    cfg.background.flows = 5000;
  } else {
    throw ConfigError("unknown profile '" + std::string(profile) + "' (expected desk or full)");
  }
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return out;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& value) {
  const double v = parse_real(key, value);
  if (v < 0.0 || v != std::floor(v) || v > 1.8e19) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return static_cast<std::uint64_t>(v);
}

inline std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

// Sets one configuration key from its textual value.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_count;
  using detail::parse_real;
  if (key == "profile") {
    apply_profile(cfg, value);
  } else if (key == "detector") {
    if (value == "albus") cfg.detector = DetectorKind::albus;
    else if (value == "albus_nobc") cfg.detector = DetectorKind::albus_nobc;
    else if (value == "countmin") cfg.detector = DetectorKind::countmin;
    else if (value == "countsketch") cfg.detector = DetectorKind::countsketch;
    else throw ConfigError("detector: unknown '" + value + "' (albus, albus_nobc, countmin, countsketch)");
  } else if (key == "memory_budget") {
    cfg.memory_budget = parse_count(key, value);
  } else if (key == "gamma") {
    const double g = parse_real(key, value);
    if (!(g > 0.0)) throw ConfigError("gamma must be positive");
    cfg.spec = FlowSpec(g, cfg.spec.beta());
  } else if (key == "beta") {
    const double b = parse_real(key, value);
    if (!(b >= 0.0)) throw ConfigError("beta must be non-negative");
    cfg.spec = FlowSpec(cfg.spec.gamma(), b);
  } else if (key == "n_bursts") {
    cfg.attack.n_bursts = parse_count(key, value);
  } else if (key == "observation") {
    cfg.attack.observation = parse_real(key, value);
  } else if (key == "burst_width") {
    cfg.attack.burst.width = parse_real(key, value);
  } else if (key == "overuse_ratio") {
    cfg.attack.burst.overuse_ratio = parse_real(key, value);
  } else if (key == "packet_size") {
    cfg.attack.burst.packet_size = static_cast<std::uint32_t>(parse_count(key, value));
  } else if (key == "background") {
    if (value == "none") cfg.background.kind = BackgroundKind::none;
    else if (value == "short_flows") cfg.background.kind = BackgroundKind::short_flows;
    else if (value == "constant") cfg.background.kind = BackgroundKind::constant;
    else if (value == "trace") cfg.background.kind = BackgroundKind::trace;
    else throw ConfigError("background: unknown '" + value + "' (none, short_flows, constant, trace)");
  } else if (key == "background_flow_rate") {
    cfg.background.flow_rate = parse_real(key, value);
  } else if (key == "background_mean_packets") {
    cfg.background.mean_packets = parse_real(key, value);
  } else if (key == "background_mean_gap") {
    cfg.background.mean_gap = parse_real(key, value);
  } else if (key == "background_flows") {
    cfg.background.flows = parse_count(key, value);
  } else if (key == "background_rate") {
    cfg.background.rate = parse_real(key, value);
  } else if (key == "background_packet_size") {
    cfg.background.packet_size = static_cast<std::uint32_t>(parse_count(key, value));
  } else if (key == "background_trace") {
    cfg.background.trace_path = value;
  } else if (key == "push_threshold") {
    cfg.push_threshold = parse_real(key, value);
  } else if (key == "rigidity") {
    cfg.rigidity = static_cast<unsigned>(parse_count(key, value));
  } else if (key == "fidelity_mode") {
    if (value == "prose") cfg.fidelity = FidelityMode::prose;
    else if (value == "literal") cfg.fidelity = FidelityMode::literal;
    else throw ConfigError("fidelity_mode: unknown '" + value + "' (prose, literal)");
  } else if (key == "depth") {
    cfg.depth = parse_count(key, value);
  } else if (key == "threshold_factor") {
    cfg.threshold_factor = parse_real(key, value);
  } else if (key == "reset_period") {
    cfg.reset_period = parse_real(key, value);
  } else if (key == "reset_mode") {
    if (value == "static") cfg.reset_mode = ResetMode::fixed;
    else if (value == "randomized") cfg.reset_mode = ResetMode::randomized;
    else throw ConfigError("reset_mode: unknown '" + value + "' (static, randomized)");
  } else if (key == "repeats") {
    cfg.repeats = parse_count(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_count(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_count(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline KeyValues parse_key_values(std::istream& in, const std::string& origin = "<config>") {
  KeyValues out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = detail::trim(std::string_view(body).substr(0, eq));
    std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Applies `profile` first, then every other pair in file order.
inline void apply_settings(ExperimentConfig& cfg, const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "profile") apply_setting(cfg, k, v);
  }
  for (const auto& [k, v] : kv) {
    if (k != "profile") apply_setting(cfg, k, v);
  }
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
  ExperimentConfig cfg;
  KeyValues kv = parse_key_values(in, origin);
  for (const auto& [k, v] : kv) {
    if (k.rfind("sweep.", 0) == 0) throw ConfigError(origin + ": '" + k + "' is only valid in sweep files");
  }
  apply_settings(cfg, kv);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  return parse_config(in, path);
}

// Stable textual form of every field; the basis of params_hash.
inline std::map<std::string, std::string> describe(const ExperimentConfig& cfg) {
  using detail::format_real;
  std::map<std::string, std::string> m;
  m["detector"] = to_string(cfg.detector);
  m["memory_budget"] = std::to_string(cfg.memory_budget);
  m["gamma"] = format_real(cfg.spec.gamma());
  m["beta"] = format_real(cfg.spec.beta());
  m["n_bursts"] = std::to_string(cfg.attack.n_bursts);
  m["observation"] = format_real(cfg.attack.observation);
  m["burst_width"] = format_real(cfg.attack.burst.width);
  m["overuse_ratio"] = format_real(cfg.attack.burst.overuse_ratio);
  m["packet_size"] = std::to_string(cfg.attack.burst.packet_size);
  m["background"] = to_string(cfg.background.kind);
  if (cfg.background.kind == BackgroundKind::short_flows) {
    m["background_flow_rate"] = format_real(cfg.background.flow_rate);
    m["background_mean_packets"] = format_real(cfg.background.mean_packets);
    m["background_mean_gap"] = format_real(cfg.background.mean_gap);
  } else if (cfg.background.kind == BackgroundKind::constant) {
    m["background_flows"] = std::to_string(cfg.background.flows);
    m["background_rate"] = format_real(cfg.background.rate > 0.0 ? cfg.background.rate : cfg.spec.gamma());
    m["background_packet_size"] = std::to_string(cfg.background.packet_size);
  } else if (cfg.background.kind == BackgroundKind::trace) {
    m["background_trace"] = cfg.background.trace_path;
  }
  if (cfg.is_albus()) {
    m["push_threshold"] = format_real(cfg.push_threshold);
    m["rigidity"] = std::to_string(cfg.rigidity);
    m["fidelity_mode"] = to_string(cfg.fidelity);
  } else {
    m["depth"] = std::to_string(cfg.depth);
    m["threshold_factor"] = format_real(cfg.threshold_factor);
    m["reset_period"] = format_real(cfg.reset_period);
    m["reset_mode"] = to_string(cfg.reset_mode);
  }
  return m;
}

// FNV-1a over the described parameters (seed and repeats excluded).
inline std::string params_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : describe(cfg)) {
    for (char c : k + "=" + v + ";") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Execution

using AnyDetector = std::variant<AlbusDetector, CountMinSketch, CountSketch>;

struct RunSeeds {
  std::uint64_t traffic;
  std::uint64_t background;
  std::uint64_t detector;
  std::uint64_t hash;

  static RunSeeds from(std::uint64_t run_seed) {
    return {derive_seed(run_seed, 1), derive_seed(run_seed, 2), derive_seed(run_seed, 3), derive_seed(run_seed, 4)};
  }
};

inline AnyDetector make_detector(const ExperimentConfig& cfg, const RunSeeds& seeds) {
  if (cfg.is_albus()) {
    AlbusParams p;
    p.cells = cfg.cells();
    p.spec = cfg.spec;
    p.push_threshold = cfg.push_threshold;
    p.rigidity = cfg.rigidity;
    p.hash_key = seeds.hash;
    p.fidelity = cfg.fidelity;
    p.seed = seeds.detector;
    p.background_filtering = cfg.detector == DetectorKind::albus;
    return AlbusDetector(p);
  }
  SketchParams p;
  p.depth = cfg.depth;
  p.width = cfg.sketch_width();
  p.spec = cfg.spec;
  p.threshold_factor = cfg.threshold_factor;
  p.reset_period = cfg.reset_period;
  p.reset_mode = cfg.reset_mode;
  p.hash_key = seeds.hash;
  p.seed = seeds.detector;
  if (cfg.detector == DetectorKind::countmin) return CountMinSketch(p);
  return CountSketch(p);
}

inline std::vector<Packet> build_trace(const ExperimentConfig& cfg, const RunSeeds& seeds) {
  AttackConfig attack = cfg.attack;
  attack.burst.spec = cfg.spec;
  attack.seed = seeds.traffic;
  std::vector<Packet> attack_packets = gen_attack(attack).packets;

  std::vector<Packet> background;
  switch (cfg.background.kind) {
    case BackgroundKind::none:
      break;
    case BackgroundKind::short_flows: {
      ShortFlowParams p;
      p.flow_rate = cfg.background.flow_rate;
      p.mean_packets = cfg.background.mean_packets;
      p.mean_gap = cfg.background.mean_gap;
      p.duration = cfg.attack.observation;
      background = gen_short_flows(p, seeds.background);
      break;
    }
    case BackgroundKind::constant: {
      const double rate = cfg.background.rate > 0.0 ? cfg.background.rate : cfg.spec.gamma();
      background = gen_constant_background(cfg.background.flows, rate, cfg.attack.observation,
                                           cfg.background.packet_size, seeds.background);
      break;
    }
    case BackgroundKind::trace:
      background = read_trace(cfg.background.trace_path);
      break;
  }
  if (background.empty()) return attack_packets;
  return merge_traces(background, attack_packets);
}

struct RunRow {
  std::string detector;
  std::string params_hash;
  std::uint64_t seed = 0;
  Scores score;
  MatchResult match;  // pairs are dropped to keep rows small
  std::size_t reports = 0;
  std::size_t events = 0;
  std::size_t packets = 0;
  double runtime_s = 0.0;
  double updates_per_s = 0.0;
};

template <BurstDetector D>
std::vector<Report> feed(D& detector, std::span<const Packet> trace) {
  std::vector<Report> reports;
  for (const Packet& p : trace) {
    if (auto r = detector.update(p.flow, p.size, p.ts)) reports.push_back(*r);
  }
  return reports;
}

inline RunRow run_once(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  const RunSeeds seeds = RunSeeds::from(run_seed);
  const std::vector<Packet> trace = build_trace(cfg, seeds);
  AnyDetector detector = make_detector(cfg, seeds);

  const auto start = std::chrono::steady_clock::now();
  std::vector<Report> reports = std::visit([&](auto& d) { return feed(d, trace); }, detector);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  const GroundTruth gt = ground_truth(trace, cfg.spec);
  RunRow row;
  row.detector = to_string(cfg.detector);
  row.params_hash = params_hash(cfg);
  row.seed = run_seed;
  row.match = match(reports, gt);
  row.match.pairs.clear();
  row.score = scores(row.match);
  row.reports = reports.size();
  row.events = gt.size();
  row.packets = trace.size();
  row.runtime_s = elapsed.count();
  row.updates_per_s = elapsed.count() > 0.0 ? static_cast<double>(trace.size()) / elapsed.count() : 0.0;
  return row;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

struct Aggregate {
  MeanStd recall, precision, f1, runtime_s, updates_per_s;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<RunRow> rows;
  Aggregate aggregate;
};

inline Aggregate aggregate(const std::vector<RunRow>& rows) {
  std::vector<double> r, p, f, t, u;
  for (const RunRow& row : rows) {
    r.push_back(row.score.recall);
    p.push_back(row.score.precision);
    f.push_back(row.score.f1);
    t.push_back(row.runtime_s);
    u.push_back(row.updates_per_s);
  }
  return {mean_std(r), mean_std(p), mean_std(f), mean_std(t), mean_std(u)};
}

// Repeat i uses seed cfg.seed + i. Repeats run concurrently (each owns its
// detector and generators); rows come back in repeat order.
inline RunResult run(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult result;
  result.config = cfg;
  result.rows.resize(cfg.repeats);
  const std::size_t hw = std::max(1U, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(cfg.repeats, cfg.threads > 0 ? cfg.threads : hw);
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.repeats; ++i) result.rows[i] = run_once(cfg, cfg.seed + i);
  } else {
    for (std::size_t base = 0; base < cfg.repeats; base += workers) {
      std::vector<std::future<RunRow>> batch;
      for (std::size_t i = base; i < std::min(cfg.repeats, base + workers); ++i) {
        batch.push_back(std::async(std::launch::async, [&cfg, i] { return run_once(cfg, cfg.seed + i); }));
      }
      for (std::size_t j = 0; j < batch.size(); ++j) result.rows[base + j] = batch[j].get();
    }
  }
  result.aggregate = aggregate(result.rows);
  return result;
}

struct SweepSpec {
  ExperimentConfig base;
  std::string axis;
  std::vector<std::string> values;
};

struct SweepPoint {
  std::string value;
  RunResult result;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline SweepSpec parse_sweep(std::istream& in, const std::string& origin = "<sweep>") {
  SweepSpec spec;
  KeyValues kv = parse_key_values(in, origin);
  KeyValues base;
  for (auto& [k, v] : kv) {
    if (k == "sweep.axis") spec.axis = v;
    else if (k == "sweep.values") spec.values = split_list(v);
    else base.emplace_back(k, v);
  }
  apply_settings(spec.base, base);
  if (spec.axis.empty()) throw ConfigError(origin + ": missing sweep.axis");
  if (spec.values.empty()) throw ConfigError(origin + ": missing sweep.values");
  if (spec.axis == "profile") throw ConfigError(origin + ": profile cannot be a sweep axis");
  return spec;
}

inline SweepSpec load_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  return parse_sweep(in, path);
}

inline SweepResult sweep(const SweepSpec& spec) {
  SweepResult out;
  out.axis = spec.axis;
  for (const std::string& value : spec.values) {
    ExperimentConfig cfg = spec.base;
    apply_setting(cfg, spec.axis, value);
    out.points.push_back({value, run(cfg)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline std::string accounting_note(const ExperimentConfig& cfg) {
  if (cfg.detector == DetectorKind::albus) {
    return std::to_string(cfg.cells()) + " LB-BC pairs x 16 B";
  }
  if (cfg.detector == DetectorKind::albus_nobc) {
    return std::to_string(cfg.cells()) + " bare LBs x 9 B";
  }
  return std::to_string(cfg.depth) + " rows x " + std::to_string(cfg.sketch_width()) + " counters x 4 B";
}

inline constexpr std::string_view kCsvHeader =
    "axis,value,detector,params_hash,seed,recall,precision,f1,tp,fp,fn,runtime_s,updates_per_s,"
    "recall_std,precision_std,f1_std";

namespace detail {

inline void write_row(std::ostream& os, std::string_view axis, std::string_view value, const RunRow& r) {
  os << axis << ',' << value << ',' << r.detector << ',' << r.params_hash << ',' << r.seed << ','
     << format_real(r.score.recall) << ',' << format_real(r.score.precision) << ',' << format_real(r.score.f1)
     << ',' << r.match.tp << ',' << r.match.fp << ',' << r.match.fn << ',' << format_real(r.runtime_s) << ','
     << format_real(r.updates_per_s) << ",,,\n";
}

inline void write_aggregate(std::ostream& os, std::string_view axis, std::string_view value, const RunResult& res) {
  const Aggregate& a = res.aggregate;
  os << axis << ',' << value << ',' << to_string(res.config.detector) << ',' << params_hash(res.config)
     << ",aggregate," << format_real(a.recall.mean) << ',' << format_real(a.precision.mean) << ','
     << format_real(a.f1.mean) << ",,,," << format_real(a.runtime_s.mean) << ','
     << format_real(a.updates_per_s.mean) << ',' << format_real(a.recall.std) << ','
     << format_real(a.precision.std) << ',' << format_real(a.f1.std) << '\n';
}

}  // namespace detail

// One row per repeat plus one aggregate row (means, with standard deviations
// in the *_std columns).
inline void write_csv(std::ostream& os, const RunResult& res, std::string_view axis = "", std::string_view value = "",
                      bool header = true) {
  if (header) os << kCsvHeader << '\n';
  for (const RunRow& r : res.rows) detail::write_row(os, axis, value, r);
  detail::write_aggregate(os, axis, value, res);
}

inline void write_csv(std::ostream& os, const SweepResult& res) {
  os << kCsvHeader << '\n';
  for (const SweepPoint& p : res.points) write_csv(os, p.result, res.axis, p.value, false);
}

inline nlohmann::json to_json(const RunRow& r) {
  return {{"detector", r.detector},   {"params_hash", r.params_hash},
          {"seed", r.seed},           {"recall", r.score.recall},
          {"precision", r.score.precision}, {"f1", r.score.f1},
          {"tp", r.match.tp},         {"fp", r.match.fp},
          {"fn", r.match.fn},         {"duplicates", r.match.duplicates},
          {"reports", r.reports},     {"events", r.events},
          {"packets", r.packets},     {"runtime_s", r.runtime_s},
          {"updates_per_s", r.updates_per_s}};
}

inline nlohmann::json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

inline nlohmann::json to_json(const RunResult& res) {
  nlohmann::json j;
  j["config"] = describe(res.config);
  j["params_hash"] = params_hash(res.config);
  j["memory_accounting"] = accounting_note(res.config);
  j["repeats"] = res.config.repeats;
  j["base_seed"] = res.config.seed;
  j["runs"] = nlohmann::json::array();
  for (const RunRow& r : res.rows) j["runs"].push_back(to_json(r));
  const Aggregate& a = res.aggregate;
  j["aggregate"] = {{"recall", to_json(a.recall)},
                    {"precision", to_json(a.precision)},
                    {"f1", to_json(a.f1)},
                    {"runtime_s", to_json(a.runtime_s)},
                    {"updates_per_s", to_json(a.updates_per_s)}};
  return j;
}

inline nlohmann::json to_json(const SweepResult& res) {
  nlohmann::json j;
  j["axis"] = res.axis;
  j["points"] = nlohmann::json::array();
  for (const SweepPoint& p : res.points) {
    nlohmann::json point = to_json(p.result);
    point["value"] = p.value;
    j["points"].push_back(std::move(point));
  }
  return j;
}

}  // namespace albus
