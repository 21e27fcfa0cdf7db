#pragma once

// CountMin-Sketch and CountSketch baselines over landmark windows. Counters are
// zeroed every R' seconds (fixed, or redrawn uniformly from (0, R] after each
// reset), and a flow is reported whenever its estimate exceeds
// k * (gamma * R' + beta).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "albus/core.hpp"

namespace albus {

enum class ResetMode { fixed, randomized };

struct SketchParams {
  std::size_t depth = 4;
  std::size_t width = 1;
  FlowSpec spec;
  double threshold_factor = 1.0;
  double reset_period = 0.2;  // R, seconds
  ResetMode reset_mode = ResetMode::fixed;
  std::uint64_t hash_key = 0;
  std::uint64_t seed = 0;
  double start = 0.0;  // beginning of the first interval

  void validate() const {
    if (depth == 0 || width == 0) throw ContractViolation("SketchParams: depth and width must be >= 1");
    if (!(reset_period > 0.0)) throw ContractViolation("SketchParams: reset period must be positive");
    if (!(threshold_factor > 0.0)) throw ContractViolation("SketchParams: threshold factor must be positive");
  }
};

inline double current_threshold(double k, const FlowSpec& spec, double period) {
  if (!(period > 0.0)) throw ContractViolation("current_threshold: period must be positive");
  return k * (spec.gamma() * period + spec.beta());
}

struct CountMinPolicy {
  static constexpr bool kSigned = false;

  static double combine(std::span<double> row_estimates) {
    return *std::min_element(row_estimates.begin(), row_estimates.end());
  }
};

struct CountSketchPolicy {
  static constexpr bool kSigned = true;

  // Median; mean of the two middle values for an even depth.
  static double combine(std::span<double> row_estimates) {
    const std::size_t n = row_estimates.size();
    const auto mid = row_estimates.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(row_estimates.begin(), mid, row_estimates.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(row_estimates.begin(), mid);
    return 0.5 * (lower + upper);
  }
};

template <class Policy>
class LandmarkSketch {
 public:
  explicit LandmarkSketch(const SketchParams& params)
      : params_((params.validate(), params)),
        counters_(params.depth * params.width, 0.0),
        scratch_(params.depth),
        rng_(derive_seed(params.seed, 0x5e7)),
        interval_start_(params.start) {
    row_keys_.reserve(params_.depth);
    sign_keys_.reserve(params_.depth);
    for (std::size_t r = 0; r < params_.depth; ++r) {
      row_keys_.push_back(derive_seed(params_.hash_key, 2 * r));
      sign_keys_.push_back(derive_seed(params_.hash_key, 2 * r + 1));
    }
    draw_period();
  }

  std::optional<Report> update(FlowId f, double size, double t) {
    reset_if_due(t);
    for (std::size_t r = 0; r < params_.depth; ++r) {
      counters_[r * params_.width + column(r, f)] += sign(r, f) * size;
    }
    if (estimate(f) > threshold_) return Report{f, t};
    return std::nullopt;
  }

  std::optional<Report> update(const Packet& p) { return update(p.flow, p.size, p.ts); }

  // Applies every reset whose boundary is at or before t.
  std::size_t reset_if_due(double t) {
    if (t < interval_start_) throw ContractViolation("LandmarkSketch: time before current interval");
    std::size_t resets = 0;
    while (t >= interval_start_ + period_) {
      if (resets == 0) std::fill(counters_.begin(), counters_.end(), 0.0);
      interval_start_ += period_;
      draw_period();
      ++resets;
    }
    return resets;
  }

  double estimate(FlowId f) const {
    for (std::size_t r = 0; r < params_.depth; ++r) {
      scratch_[r] = sign(r, f) * counters_[r * params_.width + column(r, f)];
    }
    return Policy::combine(scratch_);
  }

  std::size_t column(std::size_t row, FlowId f) const noexcept {
    return static_cast<std::size_t>(mix64(f.value ^ row_keys_[row]) % params_.width);
  }

  double sign(std::size_t row, FlowId f) const noexcept {
    if constexpr (Policy::kSigned) {
      return (mix64(f.value ^ sign_keys_[row]) & 1U) ? 1.0 : -1.0;
    } else {
      return 1.0;
    }
  }

  double threshold() const noexcept { return threshold_; }
  double period() const noexcept { return period_; }
  double interval_start() const noexcept { return interval_start_; }
  const SketchParams& params() const noexcept { return params_; }
  std::span<const double> counters() const noexcept { return counters_; }

 private:
  void draw_period() {
    if (params_.reset_mode == ResetMode::fixed) {
      period_ = params_.reset_period;
    } else {
      // 1 - u lies in (0, 1], so R' lies in (0, R].
      period_ = params_.reset_period * (1.0 - unit_uniform(rng_));
    }
    threshold_ = current_threshold(params_.threshold_factor, params_.spec, period_);
  }

  SketchParams params_;
  std::vector<double> counters_;
  std::vector<std::uint64_t> row_keys_;
  std::vector<std::uint64_t> sign_keys_;
  mutable std::vector<double> scratch_;
  std::mt19937_64 rng_;
  double interval_start_;
  double period_ = 0.0;
  double threshold_ = 0.0;
};

using CountMinSketch = LandmarkSketch<CountMinPolicy>;
using CountSketch = LandmarkSketch<CountSketchPolicy>;

static_assert(BurstDetector<CountMinSketch>);
static_assert(BurstDetector<CountSketch>);

}  // namespace albus
