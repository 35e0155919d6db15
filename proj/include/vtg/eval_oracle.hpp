#pragma once

// Brute-force reference for recall_table. Deliberately shares no scoring code
// with eval.hpp: its own interval arithmetic, its own ranking, a plain double
// loop over queries and predictions. Used only for differential testing.

#include <algorithm>
#include <string>
#include <vector>

#include "vtg/eval.hpp"

namespace vtg {

namespace oracle_detail {

inline double iou(double a0, double a1, double b0, double b1) {
  const double lo = a0 > b0 ? a0 : b0;
  const double hi = a1 < b1 ? a1 : b1;
  const double inter = hi > lo ? hi - lo : 0.0;
  const double uni = (a1 - a0) + (b1 - b0) - inter;
  if (uni <= 0.0) {
    // Both spans are points.
    return (a0 == b0 && a1 == b1) ? 1.0 : 0.0;
  }
  return inter / uni;
}

}  // namespace oracle_detail

inline RecallReport oracle_recall(const std::vector<PredictionSet>& preds, const GroundTruth& gts,
                                  const BenchmarkConvention& convention,
                                  std::optional<DatasetId> dataset = std::nullopt) {
  if (gts.empty()) throw ValidationError("empty evaluation");
  RecallReport r;
  r.dataset = dataset;
  r.convention = convention;
  r.n_queries = gts.size();
  for (const auto& p : preds) {
    if (gts.find(p.uid) == gts.end()) r.unmatched_uids.push_back(p.uid);
  }
  std::sort(r.unmatched_uids.begin(), r.unmatched_uids.end());

  for (int k : convention.ranks) {
    for (double theta : convention.iou_thresholds) {
      std::size_t hits = 0;
      for (const auto& [uid, gt] : gts) {
        const PredictionSet* match = nullptr;
        for (const auto& p : preds) {
          if (p.uid == uid) {
            match = &p;
            break;
          }
        }
        if (match == nullptr) continue;
        // Selection-sort ranking: score desc, start asc, length asc.
        std::vector<Candidate> c = match->candidates;
        for (std::size_t i = 0; i < c.size(); ++i) {
          std::size_t best = i;
          for (std::size_t j = i + 1; j < c.size(); ++j) {
            const Candidate& a = c[j];
            const Candidate& b = c[best];
            const bool better =
                a.score > b.score ||
                (a.score == b.score &&
                 (a.span.start < b.span.start ||
                  (a.span.start == b.span.start && a.span.end - a.span.start < b.span.end - b.span.start)));
            if (better) best = j;
          }
          std::swap(c[i], c[best]);
        }
        bool hit = false;
        for (std::size_t i = 0; i < c.size() && static_cast<int>(i) < k; ++i) {
          if (oracle_detail::iou(c[i].span.start, c[i].span.end, gt.start, gt.end) >= theta) hit = true;
        }
        if (hit) ++hits;
      }
      r.cells[{k, theta}] = 100.0 * static_cast<double>(hits) / static_cast<double>(r.n_queries);
    }
  }
  for (const auto& [uid, gt] : gts) {
    bool found = false;
    for (const auto& p : preds) found = found || p.uid == uid;
    if (!found) ++r.missing_predictions;
  }
  for (int k : convention.ranks) {
    double sum = 0.0;
    for (double theta : convention.iou_thresholds) sum += r.cells[{k, theta}];
    r.averages[k] = sum / static_cast<double>(convention.iou_thresholds.size());
  }
  return r;
}

}  // namespace vtg
