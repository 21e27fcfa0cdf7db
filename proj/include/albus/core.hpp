#pragma once

// Shared domain types for the burst detectors: flow identifiers, packets,
// flow specifications, the keyed flow-to-cell hash and the drain arithmetic
// of a leaky bucket.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace albus {

// Raised when a caller breaks an operation's precondition (time regression,
// invalid parameters).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FlowId {
  std::uint64_t value = 0;

  friend constexpr bool operator==(FlowId, FlowId) = default;
  friend constexpr auto operator<=>(FlowId, FlowId) = default;
};

struct Packet {
  FlowId flow;
  std::uint32_t size = 0;  // bytes
  double ts = 0.0;         // seconds

  friend bool operator==(const Packet&, const Packet&) = default;
};

// Stands in for -inf: strictly earlier than any valid packet time.
inline constexpr double kSentinelPast = -std::numeric_limits<double>::infinity();

inline constexpr bool is_sentinel(double ts) noexcept { return ts == kSentinelPast; }

// Allowance gamma * dt + beta.
class FlowSpec {
 public:
  constexpr FlowSpec() = default;
  FlowSpec(double gamma, double beta) : gamma_(gamma), beta_(beta) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw ContractViolation("FlowSpec: gamma must be positive and finite");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
      throw ContractViolation("FlowSpec: beta must be non-negative and finite");
    }
  }

  constexpr double gamma() const noexcept { return gamma_; }
  constexpr double beta() const noexcept { return beta_; }
  // Time for a full bucket (beta bytes) to drain.
  constexpr double timeout() const noexcept { return beta_ / gamma_; }

  friend bool operator==(const FlowSpec&, const FlowSpec&) = default;

 private:
  double gamma_ = 125'000.0;  // 1 Mbps
  double beta_ = 50'000.0;    // 50 KB
};

// Volume drained between two bucket touches. A bucket whose last timestamp is
// the sentinel is treated as fully drained.
inline double drain_volume(const FlowSpec& spec, double t_prev, double t_now) {
  if (is_sentinel(t_prev)) return std::numeric_limits<double>::infinity();
  if (t_now < t_prev) {
    throw ContractViolation("drain_volume: negative elapsed time");
  }
  return spec.gamma() * (t_now - t_prev);
}

// Finalizer from MurmurHash3; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

// Derives independent 64-bit keys/seeds from a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine output.
// Used instead of std::uniform_real_distribution so that streams are
// identical across standard library implementations.
template <class Engine>
double unit_uniform(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

class CellIndexer {
 public:
  CellIndexer(std::uint64_t key, std::size_t cells) : key_(mix64(key ^ 0x5851f42d4c957f2dULL)), cells_(cells) {
    if (cells == 0) throw ContractViolation("CellIndexer: cells must be >= 1");
  }

  std::size_t index(FlowId f) const noexcept {
    return static_cast<std::size_t>(mix64(f.value ^ key_) % cells_);
  }

  std::size_t cells() const noexcept { return cells_; }

 private:
  std::uint64_t key_;
  std::size_t cells_;
};

inline std::size_t cell_index(const CellIndexer& indexer, FlowId f) noexcept { return indexer.index(f); }

// Detector emission: flow f was found excessively bursty at time ts.
struct Report {
  FlowId flow;
  double ts = 0.0;

  friend bool operator==(const Report&, const Report&) = default;
};

// Anything the harness can drive packet by packet.
template <class D>
concept BurstDetector = requires(D d, FlowId f, double size, double t) {
  { d.update(f, size, t) } -> std::same_as<std::optional<Report>>;
};

}  // namespace albus

template <>
struct std::hash<albus::FlowId> {
  std::size_t operator()(albus::FlowId f) const noexcept {
    return static_cast<std::size_t>(albus::mix64(f.value));
  }
};
