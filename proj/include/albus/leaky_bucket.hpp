#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "albus/core.hpp"

namespace albus {

struct Bucket {
  double count = 0.0;
  double ts = kSentinelPast;

  friend bool operator==(const Bucket&, const Bucket&) = default;
};

struct BucketUpdate {
  Bucket bucket;
  bool violated = false;
};

// One step of the classic leaky bucket: drain since the last touch, add the
// packet, flag if the count exceeds beta.
[[nodiscard]] inline BucketUpdate lb_update(Bucket b, double size, double t, const FlowSpec& spec) {
  if (!is_sentinel(b.ts) && t < b.ts) {
    throw ContractViolation("lb_update: time regression");
  }
  const double drained = drain_volume(spec, b.ts, t);
  b.count = std::max(b.count - drained, 0.0) + size;
  b.ts = t;
  return {b, b.count > spec.beta()};
}

struct ViolationEvent {
  FlowId flow;
  double ts = 0.0;      // packet that pushed the exact count above beta
  double exceed = 0.0;  // count - beta at that instant

  friend bool operator==(const ViolationEvent&, const ViolationEvent&) = default;
};

// Exact per-flow leaky buckets with unbounded memory. After every violation
// the flow's count restarts at zero so bursts are countable.
class ExactOracle {
 public:
  explicit ExactOracle(FlowSpec spec) : spec_(spec) {}

  std::optional<ViolationEvent> update(FlowId f, double size, double t) {
    if (t < last_ts_) throw ContractViolation("ExactOracle: stream not sorted by timestamp");
    last_ts_ = t;
    Bucket& b = buckets_[f];
    const auto [next, violated] = lb_update(b, size, t, spec_);
    b = next;
    if (!violated) return std::nullopt;
    ViolationEvent ev{f, t, b.count - spec_.beta()};
    b.count = 0.0;
    return ev;
  }

  std::optional<ViolationEvent> update(const Packet& p) { return update(p.flow, p.size, p.ts); }

  const FlowSpec& spec() const noexcept { return spec_; }
  std::size_t tracked_flows() const noexcept { return buckets_.size(); }

 private:
  FlowSpec spec_;
  std::unordered_map<FlowId, Bucket> buckets_;
  double last_ts_ = kSentinelPast;
};

inline std::vector<ViolationEvent> oracle_events(std::span<const Packet> stream, const FlowSpec& spec) {
  ExactOracle oracle(spec);
  std::vector<ViolationEvent> events;
  for (const Packet& p : stream) {
    if (auto ev = oracle.update(p)) events.push_back(*ev);
  }
  return events;
}

}  // namespace albus
