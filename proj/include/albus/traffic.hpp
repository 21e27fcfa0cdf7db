#pragma once

// Burst-flood synthesis, constant-rate background traffic and the CSV trace
// formats the tools exchange.
//
// Trace CSV:  ts_ns,flow_id,size_bytes           (header optional)
// Label CSV:  flow_id,start_ns,width_ns,overuse_ratio_milli

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "albus/core.hpp"

namespace albus {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BurstParams {
  double width = 0.2;  // w, seconds
  double overuse_ratio = 1.2;
  FlowSpec spec;
  std::uint32_t packet_size = 1000;

  double volume() const noexcept { return spec.gamma() * width + overuse_ratio * spec.beta(); }

  void validate() const {
    if (!(width > 0.0)) throw ContractViolation("BurstParams: width must be positive");
    if (!(overuse_ratio > 0.0)) throw ContractViolation("BurstParams: overuse ratio must be positive");
    if (packet_size == 0) throw ContractViolation("BurstParams: packet size must be positive");
  }
};

struct AttackConfig {
  std::size_t n_bursts = 3800;
  double observation = 5.0;  // seconds
  BurstParams burst;
  std::uint64_t seed = 0;
  // Attack flows get ids first_flow_id, first_flow_id + 1, ...
  std::uint64_t first_flow_id = std::uint64_t{1} << 40;
};

struct BurstLabel {
  FlowId flow;
  double start = 0.0;
  double width = 0.0;
  double overuse_ratio = 0.0;

  friend bool operator==(const BurstLabel&, const BurstLabel&) = default;
};

struct LabeledTrace {
  std::vector<Packet> packets;
  std::vector<BurstLabel> labels;
};

// Constant-rate train over [t0, t0 + w] carrying round(gamma*w + l*beta) bytes:
// full-size packets, then one remainder packet.
inline std::vector<Packet> gen_burst(FlowId flow, double t0, const BurstParams& bp) {
  bp.validate();
  const auto total = static_cast<std::uint64_t>(std::max<long long>(std::llround(bp.volume()), 1));
  const std::uint64_t psize = bp.packet_size;
  if (total < psize) return {Packet{flow, static_cast<std::uint32_t>(total), t0}};

  const std::uint64_t full = total / psize;
  const std::uint64_t rem = total % psize;
  const std::uint64_t n = full + (rem > 0 ? 1 : 0);

  std::vector<Packet> out;
  out.reserve(n);
  const double gap = n > 1 ? bp.width / static_cast<double>(n - 1) : 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    const double ts = (k + 1 == n && n > 1) ? t0 + bp.width : t0 + gap * static_cast<double>(k);
    const auto size = static_cast<std::uint32_t>(k < full ? psize : rem);
    out.push_back({flow, size, ts});
  }
  return out;
}

inline void sort_by_time(std::vector<Packet>& packets) {
  std::stable_sort(packets.begin(), packets.end(), [](const Packet& a, const Packet& b) { return a.ts < b.ts; });
}

inline LabeledTrace gen_attack(const AttackConfig& cfg) {
  cfg.burst.validate();
  const double latest_start = cfg.observation - cfg.burst.width;
  if (cfg.n_bursts > 0 && latest_start < 0.0) {
    throw ContractViolation("gen_attack: burst width exceeds observation interval");
  }
  std::mt19937_64 rng(derive_seed(cfg.seed, 0xa77ac));
  LabeledTrace trace;
  trace.labels.reserve(cfg.n_bursts);
  for (std::size_t b = 0; b < cfg.n_bursts; ++b) {
    const FlowId flow{cfg.first_flow_id + b};
    const double start = unit_uniform(rng) * latest_start;
    trace.labels.push_back({flow, start, cfg.burst.width, cfg.burst.overuse_ratio});
    const auto train = gen_burst(flow, start, cfg.burst);
    trace.packets.insert(trace.packets.end(), train.begin(), train.end());
  }
  sort_by_time(trace.packets);
  return trace;
}

// n_flows flows each sending packet_size bytes every packet_size/rate seconds,
// with a random phase, over [0, duration).
inline std::vector<Packet> gen_constant_background(std::size_t n_flows, double rate, double duration,
                                                   std::uint32_t packet_size, std::uint64_t seed,
                                                   std::uint64_t first_flow_id = 1) {
  if (!(rate > 0.0)) throw ContractViolation("gen_constant_background: rate must be positive");
  if (packet_size == 0) throw ContractViolation("gen_constant_background: packet size must be positive");
  std::mt19937_64 rng(derive_seed(seed, 0xb6));
  const double spacing = static_cast<double>(packet_size) / rate;
  std::vector<Packet> out;
  if (duration > 0.0) out.reserve(static_cast<std::size_t>(n_flows * (duration / spacing + 1.0)));
  for (std::size_t i = 0; i < n_flows; ++i) {
    const FlowId flow{first_flow_id + i};
    const double phase = unit_uniform(rng) * spacing;
    double prev = kSentinelPast;
    for (std::uint64_t k = 0;; ++k) {
      double ts = std::max(phase + spacing * static_cast<double>(k), prev);
      // Rounding must never let a gap drain less than one packet.
      while (k > 0 && rate * (ts - prev) < packet_size) ts = std::nextafter(ts, duration + 1.0);
      if (!(ts < duration)) break;
      out.push_back({flow, packet_size, ts});
      prev = ts;
    }
  }
  sort_by_time(out);
  return out;
}

// Many short, small flows: a stand-in for backbone traces where most flows
// carry a few packets within a second.
struct ShortFlowParams {
  double flow_rate = 10'000.0;  // new flows per second
  double mean_packets = 5.0;    // geometric, >= 1
  double mean_gap = 0.05;       // exponential inter-packet gap, seconds
  double duration = 5.0;
  std::uint64_t first_flow_id = 1;
  // Packet sizes and their weights.
  std::vector<std::uint32_t> sizes{64, 576, 1500};
  std::vector<double> weights{0.45, 0.15, 0.40};

  void validate() const {
    if (!(flow_rate >= 0.0)) throw ContractViolation("ShortFlowParams: flow rate must be non-negative");
    if (!(mean_packets >= 1.0)) throw ContractViolation("ShortFlowParams: mean packets must be >= 1");
    if (!(mean_gap > 0.0)) throw ContractViolation("ShortFlowParams: mean gap must be positive");
    if (sizes.empty() || sizes.size() != weights.size()) {
      throw ContractViolation("ShortFlowParams: sizes and weights must be non-empty and paired");
    }
    for (auto s : sizes) {
      if (s == 0) throw ContractViolation("ShortFlowParams: packet sizes must be positive");
    }
  }
};

inline std::vector<Packet> gen_short_flows(const ShortFlowParams& p, std::uint64_t seed) {
  p.validate();
  std::mt19937_64 rng(derive_seed(seed, 0x5f));
  std::vector<double> cumulative;
  double total_weight = 0.0;
  for (double w : p.weights) cumulative.push_back(total_weight += w);
  if (!(total_weight > 0.0)) throw ContractViolation("ShortFlowParams: weights must sum to a positive value");

  const auto draw_size = [&] {
    const double u = unit_uniform(rng) * total_weight;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return p.sizes[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), p.sizes.size() - 1)];
  };
  // 1 - u lies in (0, 1], keeping the logarithms finite.
  const auto draw_exp = [&](double mean) { return -mean * std::log(1.0 - unit_uniform(rng)); };

  std::vector<Packet> out;
  const double stop_probability = 1.0 / p.mean_packets;
  std::uint64_t next_id = p.first_flow_id;
  for (double start = p.flow_rate > 0.0 ? draw_exp(1.0 / p.flow_rate) : p.duration; start < p.duration;
       start += draw_exp(1.0 / p.flow_rate)) {
    const FlowId flow{next_id++};
    double ts = start;
    while (ts < p.duration) {
      out.push_back({flow, draw_size(), ts});
      if (unit_uniform(rng) < stop_probability) break;
      ts += draw_exp(p.mean_gap);
    }
  }
  sort_by_time(out);
  return out;
}

// Time-ordered merge; ties keep packets of `a` first.
inline std::vector<Packet> merge_traces(std::span<const Packet> a, std::span<const Packet> b) {
  std::vector<Packet> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
             [](const Packet& x, const Packet& y) { return x.ts < y.ts; });
  return out;
}

namespace detail {

inline std::uint64_t to_ns(double seconds) {
  if (!(seconds >= 0.0)) throw ContractViolation("trace timestamps must be non-negative");
  return static_cast<std::uint64_t>(std::llround(seconds * 1e9));
}

inline double from_ns(std::uint64_t ns) { return static_cast<double>(ns) / 1e9; }

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    std::string_view field = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

inline std::uint64_t parse_u64(std::string_view field, const std::string& where, std::string_view name) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw TraceError(where + ": invalid " + std::string(name) + " '" + std::string(field) + "'");
  }
  return value;
}

inline bool is_header(std::string_view line) {
  if (line.empty()) return false;
  const char c = line.front();
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

template <class RowFn>
void for_each_row(const std::string& path, std::size_t columns, RowFn&& fn) {
  std::ifstream in(path);
  if (!in) throw TraceError(path + ": cannot open for reading");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    if (lineno == 1 && is_header(view)) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto fields = split_fields(view);
    if (fields.size() != columns) {
      throw TraceError(where + ": expected " + std::to_string(columns) + " fields, got " +
                       std::to_string(fields.size()));
    }
    fn(fields, where);
  }
}

}  // namespace detail

inline std::vector<Packet> read_trace(const std::string& path) {
  std::vector<Packet> packets;
  std::uint64_t last_ns = 0;
  detail::for_each_row(path, 3, [&](const std::vector<std::string_view>& f, const std::string& where) {
    const std::uint64_t ts_ns = detail::parse_u64(f[0], where, "ts_ns");
    const std::uint64_t flow = detail::parse_u64(f[1], where, "flow_id");
    const std::uint64_t size = detail::parse_u64(f[2], where, "size_bytes");
    if (size == 0 || size > std::numeric_limits<std::uint32_t>::max()) {
      throw TraceError(where + ": size_bytes must be in [1, 2^32)");
    }
    if (!packets.empty() && ts_ns < last_ns) {
      throw TraceError(where + ": timestamp goes backwards (" + std::to_string(ts_ns) + " < " +
                       std::to_string(last_ns) + ")");
    }
    last_ns = ts_ns;
    packets.push_back({FlowId{flow}, static_cast<std::uint32_t>(size), detail::from_ns(ts_ns)});
  });
  return packets;
}

inline void write_trace(const std::string& path, std::span<const Packet> packets) {
  std::ofstream out(path);
  if (!out) throw TraceError(path + ": cannot open for writing");
  out << "ts_ns,flow_id,size_bytes\n";
  for (const Packet& p : packets) {
    out << detail::to_ns(p.ts) << ',' << p.flow.value << ',' << p.size << '\n';
  }
  if (!out) throw TraceError(path + ": write failed");
}

inline std::vector<BurstLabel> read_labels(const std::string& path) {
  std::vector<BurstLabel> labels;
  detail::for_each_row(path, 4, [&](const std::vector<std::string_view>& f, const std::string& where) {
    const std::uint64_t flow = detail::parse_u64(f[0], where, "flow_id");
    const std::uint64_t start = detail::parse_u64(f[1], where, "start_ns");
    const std::uint64_t width = detail::parse_u64(f[2], where, "width_ns");
    const std::uint64_t milli = detail::parse_u64(f[3], where, "overuse_ratio_milli");
    labels.push_back({FlowId{flow}, detail::from_ns(start), detail::from_ns(width), static_cast<double>(milli) / 1000.0});
  });
  return labels;
}

inline void write_labels(const std::string& path, std::span<const BurstLabel> labels) {
  std::ofstream out(path);
  if (!out) throw TraceError(path + ": cannot open for writing");
  out << "flow_id,start_ns,width_ns,overuse_ratio_milli\n";
  for (const BurstLabel& l : labels) {
    out << l.flow.value << ',' << detail::to_ns(l.start) << ',' << detail::to_ns(l.width) << ','
        << std::llround(l.overuse_ratio * 1000.0) << '\n';
  }
  if (!out) throw TraceError(path + ": write failed");
}

}  // namespace albus
