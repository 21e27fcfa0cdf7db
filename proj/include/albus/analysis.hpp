#pragma once

// Fluid-model detection probabilities for a single burst in a single cell.
//
// A burst of width w and overuse ratio l with cumulative volume v_f(t) is
// caught by an LB assigned at t' iff v_f(t') < gamma * t' + (l - 1) * beta,
// i.e. iff t' precedes the deadline t*. Before t* the flow reaches the LB
// either by a push (its background count outweighs the threshold plus all
// competitors) or by a pull at one of the cell's clearing times.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "albus/core.hpp"

namespace albus {

using VolumeCurve = std::function<double(double)>;

struct BurstShape {
  double width = 0.2;
  double overuse_ratio = 1.2;
  FlowSpec spec;
  VolumeCurve volume;  // bytes sent in [0, t], t in [0, width]
  // Kinks of a piecewise shape; always sampled by push_guaranteed.
  std::vector<double> breakpoints;

  double total_volume() const noexcept { return spec.gamma() * width + overuse_ratio * spec.beta(); }

  static BurstShape constant_rate(double width, double overuse_ratio, const FlowSpec& spec) {
    BurstShape shape{width, overuse_ratio, spec, {}, {}};
    const double rate = shape.total_volume() / width;
    shape.volume = [rate, width](double t) { return rate * std::clamp(t, 0.0, width); };
    return shape;
  }
};

struct CellScenario {
  // Cumulative volumes of the other flows mapped to the cell, measured from the
  // burst start. The initial BC count is folded into its occupant's curve.
  std::vector<VolumeCurve> competitors;
  std::vector<double> clearing_times;  // sorted
  double push_threshold = 10'000.0;

  double competitor_volume(double t) const {
    double total = 0.0;
    for (const auto& v : competitors) total += v(t);
    return total;
  }
};

inline double detection_deadline(const BurstShape& shape) {
  if (shape.overuse_ratio <= 1.0) return 0.0;
  const double gamma = shape.spec.gamma();
  const double excess = (shape.overuse_ratio - 1.0) * shape.spec.beta();
  const auto margin = [&](double t) { return shape.volume(t) - gamma * t - excess; };

  // margin(0) = -excess < 0 and margin(w) = beta > 0.
  double lo = 0.0;
  double hi = shape.width;
  const double tol = 1e-9 * shape.width;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (margin(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double majority_prob(double volume, double others_total) {
  if (others_total <= 0.0) return 1.0;
  return std::min(1.0, volume / others_total);
}

inline bool push_guaranteed(const BurstShape& shape, const CellScenario& scenario, std::size_t grid_points = 10'000) {
  const double deadline = detection_deadline(shape);
  const auto pushes = [&](double t) {
    return shape.volume(t) > scenario.push_threshold + scenario.competitor_volume(t);
  };
  const std::size_t n = std::max<std::size_t>(grid_points, 10'000);
  for (std::size_t k = 0; k < n; ++k) {
    if (pushes(deadline * static_cast<double>(k) / static_cast<double>(n))) return true;
  }
  for (double b : shape.breakpoints) {
    if (b >= 0.0 && b < deadline && pushes(b)) return true;
  }
  return false;
}

// Probability that the flow is pulled at one of the given opportunities, given
// the flow's BC occupancy probability at each.
inline double pull_prob(std::span<const double> occupancy) {
  double missed_so_far = 1.0;
  double total = 0.0;
  for (double p : occupancy) {
    total += p * missed_so_far;
    missed_so_far *= 1.0 - p;
  }
  return std::clamp(total, 0.0, 1.0);
}

inline double pull_prob(const BurstShape& shape, const CellScenario& scenario) {
  const double deadline = detection_deadline(shape);
  std::vector<double> occupancy;
  for (double t : scenario.clearing_times) {
    if (t >= deadline) break;
    occupancy.push_back(majority_prob(shape.volume(t), scenario.competitor_volume(t)));
  }
  return pull_prob(occupancy);
}

inline double detection_prob(const BurstShape& shape, const CellScenario& scenario) {
  return push_guaranteed(shape, scenario) ? 1.0 : pull_prob(shape, scenario);
}

}  // namespace albus
