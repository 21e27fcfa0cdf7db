#pragma once

// Leaky buckets that are dynamically assigned to flows, steered by one
// background counter per bucket.
//
// Every packet is hashed to a cell holding one leaky bucket (LB) and one
// background counter (BC). A flow owning the LB is checked exactly; a flow
// whose packets stop outpacing the drain is evicted and the BC's flow is
// pulled in. Foreign packets compete for the BC through probabilistic decay,
// and a BC flow whose count passes the push threshold swaps places with the
// LB flow. An LB flow that has been silent for beta/gamma is timed out.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "albus/core.hpp"

namespace albus {

// prose: the behavior described in the algorithm's text and case figure.
// literal: the published pseudocode executed verbatim.
enum class FidelityMode { prose, literal };

struct LbCell {
  std::optional<FlowId> flow;
  double ts = kSentinelPast;
  double count = 0.0;

  friend bool operator==(const LbCell&, const LbCell&) = default;
};

struct BgCounter {
  std::optional<FlowId> flow;
  double count = 0.0;

  friend bool operator==(const BgCounter&, const BgCounter&) = default;
};

struct AlbusParams {
  std::size_t cells = 1;
  FlowSpec spec;
  double push_threshold = 10'000.0;  // T, bytes
  unsigned rigidity = 0;             // decay probability is 0.1^r
  std::uint64_t hash_key = 0;
  FidelityMode fidelity = FidelityMode::prose;
  std::uint64_t seed = 0;
  // false runs the bare LB array (no background filtering, no push).
  bool background_filtering = true;

  double decay_probability() const { return std::pow(0.1, static_cast<double>(rigidity)); }

  void validate() const {
    if (cells == 0) throw ContractViolation("AlbusParams: cells must be >= 1");
    if (!(push_threshold > 0.0)) throw ContractViolation("AlbusParams: push threshold must be positive");
    if (!(decay_probability() > 0.0)) throw ContractViolation("AlbusParams: rigidity too large");
  }
};

enum class BcOutcome { filled, incremented, decayed, replaced, untouched };

// Offers one foreign packet to a background counter. With decay probability 1
// this is the weighted Boyer-Moore majority vote: an incoming flow that
// outweighs the current count takes over with the residual.
template <class Engine>
BcOutcome offer_to_background(BgCounter& bc, FlowId f, double size, double decay_probability, Engine& rng,
                              FidelityMode mode = FidelityMode::prose) {
  if (bc.flow == f) {
    bc.count += size;
    return BcOutcome::incremented;
  }
  if (!bc.flow) {
    bc = {f, size};
    return BcOutcome::filled;
  }
  // Draw only when decay is not certain; r = 0 consumes no randomness.
  if (decay_probability < 1.0 && !(unit_uniform(rng) < decay_probability)) {
    return BcOutcome::untouched;
  }
  if (size > bc.count) {
    bc = {f, mode == FidelityMode::prose ? size - bc.count : size};
    return BcOutcome::replaced;
  }
  bc.count -= size;
  return BcOutcome::decayed;
}

class AlbusDetector {
 public:
  explicit AlbusDetector(const AlbusParams& params)
      : params_((params.validate(), params)),
        indexer_(params.hash_key, params.cells),
        lbs_(params.cells),
        bcs_(params.cells),
        rng_(derive_seed(params.seed, 0xa1b05)),
        decay_p_(params.decay_probability()) {}

  std::optional<Report> update(FlowId f, double size, double t) {
    if (t < last_ts_) throw ContractViolation("AlbusDetector: time regression");
    last_ts_ = t;

    const std::size_t i = indexer_.index(f);
    LbCell& lb = lbs_[i];
    BgCounter& bc = bcs_[i];

    if (lb.flow == f) return update_monitored(lb, bc, f, size, t);

    if (!lb.flow) {
      lb = {f, t, prose() ? size : 0.0};
      if (lb.count > beta()) return report(lb, bc, f, t);
      return std::nullopt;
    }

    if (lb.ts < t - params_.spec.timeout()) {
      pull(lb, bc);
      return std::nullopt;
    }

    if (!params_.background_filtering) return std::nullopt;

    const BcOutcome outcome = offer_to_background(bc, f, size, decay_p_, rng_, params_.fidelity);
    if (outcome == BcOutcome::incremented && bc.count > params_.push_threshold) {
      // Masking-attack safeguard: the LB count moves into the BC unchanged.
      const BgCounter displaced{lb.flow, lb.count};
      lb = {f, t, 0.0};
      bc = displaced;
    }
    return std::nullopt;
  }

  std::optional<Report> update(const Packet& p) { return update(p.flow, p.size, p.ts); }

  std::size_t cells() const noexcept { return lbs_.size(); }
  std::size_t index_of(FlowId f) const noexcept { return indexer_.index(f); }
  const AlbusParams& params() const noexcept { return params_; }
  const LbCell& lb(std::size_t i) const { return lbs_.at(i); }
  const BgCounter& bc(std::size_t i) const { return bcs_.at(i); }

  // Overwrites one LB-BC pair; used to stage scenarios.
  void load_cell(std::size_t i, const LbCell& lb, const BgCounter& bc) {
    lbs_.at(i) = lb;
    bcs_.at(i) = bc;
  }

 private:
  std::optional<Report> update_monitored(LbCell& lb, BgCounter& bc, FlowId f, double size, double t) {
    if (prose() && is_sentinel(lb.ts)) {
      // First packet of a pulled flow: start counting here instead of
      // evicting on an infinite drain.
      lb.ts = t;
      lb.count = size;
      if (lb.count > beta()) return report(lb, bc, f, t);
      return std::nullopt;
    }

    const double drained = drain_volume(params_.spec, lb.ts, t);
    lb.count = std::max(lb.count - drained, 0.0) + size;
    if (lb.count > beta()) return report(lb, bc, f, t);
    if (size < drained) {
      pull(lb, bc);
      return std::nullopt;
    }
    if (prose()) lb.ts = t;
    return std::nullopt;
  }

  Report report(LbCell& lb, BgCounter& bc, FlowId f, double t) {
    pull(lb, bc);
    return {f, t};
  }

  static void pull(LbCell& lb, BgCounter& bc) {
    lb = {bc.flow, kSentinelPast, 0.0};
    bc = {};
  }

  bool prose() const noexcept { return params_.fidelity == FidelityMode::prose; }
  double beta() const noexcept { return params_.spec.beta(); }

  AlbusParams params_;
  CellIndexer indexer_;
  std::vector<LbCell> lbs_;
  std::vector<BgCounter> bcs_;
  std::mt19937_64 rng_;
  double decay_p_;
  double last_ts_ = kSentinelPast;
};

inline AlbusDetector albus_new(const AlbusParams& params) { return AlbusDetector(params); }

static_assert(BurstDetector<AlbusDetector>);

}  // namespace albus
