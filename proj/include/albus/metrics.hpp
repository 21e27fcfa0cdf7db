#pragma once

// Ground truth, report-to-burst matching and recall / precision / F1.

#include <algorithm>
#include <cstddef>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "albus/core.hpp"
#include "albus/leaky_bucket.hpp"

namespace albus {

struct GroundTruth {
  std::vector<ViolationEvent> events;
  // An event at ts stays claimable by reports in [ts, ts + slack].
  double slack = 0.0;

  std::size_t size() const noexcept { return events.size(); }
};

inline GroundTruth ground_truth(std::span<const Packet> trace, const FlowSpec& spec) {
  return {oracle_events(trace, spec), spec.timeout()};
}

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t duplicates = 0;  // reports of already-matched events; neither TP nor FP
  // (report index, event index)
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// A report (f, t) claims the earliest unmatched event of f whose active
// interval contains t. Reports that only hit already-claimed events are
// duplicates; reports hitting no event are false positives.
inline MatchResult match(std::span<const Report> reports, const GroundTruth& gt) {
  std::unordered_map<FlowId, std::vector<std::size_t>> by_flow;
  for (std::size_t e = 0; e < gt.events.size(); ++e) by_flow[gt.events[e].flow].push_back(e);
  for (auto& [flow, idx] : by_flow) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return gt.events[a].ts < gt.events[b].ts; });
  }

  std::vector<bool> claimed(gt.events.size(), false);
  MatchResult result;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const Report& rep = reports[r];
    const auto it = by_flow.find(rep.flow);
    bool hit_claimed = false;
    bool matched = false;
    if (it != by_flow.end()) {
      const auto& idx = it->second;
      // First event that can still be active at rep.ts.
      auto pos = std::lower_bound(idx.begin(), idx.end(), rep.ts - gt.slack,
                                  [&](std::size_t e, double t) { return gt.events[e].ts < t; });
      for (; pos != idx.end() && gt.events[*pos].ts <= rep.ts; ++pos) {
        const ViolationEvent& ev = gt.events[*pos];
        if (rep.ts > ev.ts + gt.slack) continue;
        if (claimed[*pos]) {
          hit_claimed = true;
          continue;
        }
        claimed[*pos] = true;
        result.pairs.emplace_back(r, *pos);
        matched = true;
        break;
      }
    }
    if (matched) {
      ++result.tp;
    } else if (hit_claimed) {
      ++result.duplicates;
    } else {
      ++result.fp;
    }
  }
  result.fn = gt.events.size() - result.tp;
  return result;
}

inline MatchResult match(std::span<const Report> reports, const GroundTruth& gt, const FlowSpec& spec) {
  GroundTruth adjusted = gt;
  adjusted.slack = spec.timeout();
  return match(reports, adjusted);
}

struct Scores {
  double recall = 1.0;
  double precision = 1.0;
  double f1 = 1.0;
};

// Empty denominators score 1: no bursts means nothing was missed, no reports
// means nothing was wrongly reported.
inline Scores scores(const MatchResult& m) {
  const double truth = static_cast<double>(m.tp + m.fn);
  const double reported = static_cast<double>(m.tp + m.fp);
  const double tp = static_cast<double>(m.tp);
  Scores s;
  s.recall = truth > 0 ? tp / truth : 1.0;
  s.precision = reported > 0 ? tp / reported : 1.0;
  s.f1 = (truth + reported) > 0 ? 2.0 * tp / (truth + reported) : 1.0;
  return s;
}

}  // namespace albus
