#pragma once

// Recall@K at temporal-IoU thresholds, averaged scores, cross-dataset
// matrices, and table rendering.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vtg/core.hpp"
#include "vtg/error.hpp"
#include "vtg/grounder.hpp"
#include "vtg/ingest.hpp"
#include "vtg/table.hpp"

namespace vtg {

using GroundTruth = std::unordered_map<std::string, TimeSpan>;

struct RecallReport {
  std::optional<DatasetId> dataset;
  std::string label;  // display name; defaults to the dataset's
  BenchmarkConvention convention;
  std::map<std::pair<int, double>, double> cells;  // (K, theta) -> percent
  std::map<int, double> averages;                  // K -> mean over theta
  std::size_t n_queries = 0;
  std::size_t missing_predictions = 0;       // ground truths without a prediction (counted as misses)
  std::vector<std::string> unmatched_uids;  // predictions without a ground truth (ignored)

  double cell(int k, double theta) const {
    auto it = cells.find({k, theta});
    if (it == cells.end()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "missing cell R@%d@%.2f", k, theta);
      throw ValidationError(buf);
    }
    return it->second;
  }

  std::string name() const {
    if (!label.empty()) return label;
    return dataset ? dataset->display_name() : std::string("all");
  }
};

// True iff one of the first min(K, n) candidates reaches IoU >= theta.
inline bool hit_at(const PredictionSet& preds, const TimeSpan& gt, int k, double theta) {
  const std::size_t n = std::min(preds.candidates.size(), static_cast<std::size_t>(std::max(k, 0)));
  for (std::size_t i = 0; i < n; ++i) {
    if (temporal_iou(preds.candidates[i].span, gt) >= theta) return true;
  }
  return false;
}

namespace eval_detail {

inline void fill_averages(RecallReport& r) {
  for (int k : r.convention.ranks) {
    double sum = 0.0;
    for (double t : r.convention.iou_thresholds) sum += r.cells.at({k, t});
    r.averages[k] = sum / static_cast<double>(r.convention.iou_thresholds.size());
  }
}

}  // namespace eval_detail

// Recall over queries: every ground truth is one query; a ground truth with no
// prediction set is a miss. Candidates are re-ranked with the PredictionSet
// order before the top-K cut.
inline RecallReport recall_table(const std::vector<PredictionSet>& preds, const GroundTruth& gts,
                                 const BenchmarkConvention& convention,
                                 std::optional<DatasetId> dataset = std::nullopt) {
  if (gts.empty()) throw ValidationError("empty evaluation");
  RecallReport r;
  r.dataset = dataset;
  r.convention = convention;
  r.n_queries = gts.size();

  // Query hit counts per (K, theta).
  std::map<std::pair<int, double>, std::size_t> hits;
  std::unordered_map<std::string, const PredictionSet*> by_uid;
  for (const auto& p : preds) {
    if (!gts.count(p.uid)) {
      r.unmatched_uids.push_back(p.uid);
      continue;
    }
    by_uid.emplace(p.uid, &p);
  }
  for (const auto& [uid, gt] : gts) {
    auto it = by_uid.find(uid);
    if (it == by_uid.end()) {
      ++r.missing_predictions;
      continue;
    }
    PredictionSet ranked = *it->second;
    std::stable_sort(ranked.candidates.begin(), ranked.candidates.end(), ranks_before);
    for (int k : convention.ranks) {
      for (double t : convention.iou_thresholds) {
        if (hit_at(ranked, gt, k, t)) ++hits[{k, t}];
      }
    }
  }
  for (int k : convention.ranks) {
    for (double t : convention.iou_thresholds) {
      r.cells[{k, t}] = 100.0 * static_cast<double>(hits[{k, t}]) / static_cast<double>(r.n_queries);
    }
  }
  eval_detail::fill_averages(r);
  std::sort(r.unmatched_uids.begin(), r.unmatched_uids.end());
  return r;
}

// Non-increasing in theta for fixed K, non-decreasing in K for fixed theta.
inline bool is_monotone(const RecallReport& r) {
  auto ks = r.convention.ranks;
  auto ts = r.convention.iou_thresholds;
  std::sort(ks.begin(), ks.end());
  std::sort(ts.begin(), ts.end());
  for (int k : ks) {
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (r.cell(k, ts[i]) > r.cell(k, ts[i - 1])) return false;
    }
  }
  for (double t : ts) {
    for (std::size_t i = 1; i < ks.size(); ++i) {
      if (r.cell(ks[i], t) < r.cell(ks[i - 1], t)) return false;
    }
  }
  return true;
}

// Mean of the four cells R@{1,5} at the convention's two thresholds.
inline double mean_r1_r5(const RecallReport& r) {
  double sum = 0.0;
  int n = 0;
  for (int k : {1, 5}) {
    for (double t : r.convention.iou_thresholds) {
      sum += r.cell(k, t);
      ++n;
    }
  }
  if (n == 0) throw ValidationError("missing cells");
  return sum / n;
}

inline GroundTruth ground_truth_map(const std::vector<CanonicalRecord>& records) {
  GroundTruth g;
  for (const auto& r : records) g.emplace(r.uid, r.span);
  return g;
}

// ---- cross-dataset matrix ----------------------------------------------------

struct CrossMatrix {
  std::vector<DatasetId> rows;  // training set
  std::vector<DatasetId> cols;  // test set
  std::vector<std::vector<std::optional<double>>> cells;

  std::optional<double> at(const DatasetId& train, const DatasetId& test) const {
    auto r = std::find(rows.begin(), rows.end(), train);
    auto c = std::find(cols.begin(), cols.end(), test);
    if (r == rows.end() || c == cols.end()) return std::nullopt;
    return cells[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - cols.begin())];
  }

  std::vector<std::optional<double>> diagonal() const {
    std::vector<std::optional<double>> d;
    for (const auto& r : rows) {
      if (std::find(cols.begin(), cols.end(), r) != cols.end()) d.push_back(at(r, r));
    }
    return d;
  }
};

using CrossKey = std::pair<DatasetId, DatasetId>;

// Rows and columns follow the given orders, or the sorted dataset order when
// omitted. Pairs without a value stay empty.
inline CrossMatrix cross_matrix(const std::map<CrossKey, double>& values,
                                std::vector<DatasetId> row_order = {},
                                std::vector<DatasetId> col_order = {}) {
  CrossMatrix m;
  if (row_order.empty()) {
    std::set<DatasetId> s;
    for (const auto& [k, v] : values) s.insert(k.first);
    row_order.assign(s.begin(), s.end());
  }
  if (col_order.empty()) {
    std::set<DatasetId> s;
    for (const auto& [k, v] : values) s.insert(k.second);
    col_order.assign(s.begin(), s.end());
  }
  m.rows = std::move(row_order);
  m.cols = std::move(col_order);
  m.cells.assign(m.rows.size(), std::vector<std::optional<double>>(m.cols.size()));
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
      if (auto it = values.find({m.rows[i], m.cols[j]}); it != values.end()) m.cells[i][j] = it->second;
    }
  }
  return m;
}

// ---- rendering ---------------------------------------------------------------

namespace eval_detail {

inline std::string pct(std::optional<double> v) {
  if (!v) return "--";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

inline std::string theta_label(double t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", t);
  return buf;
}

}  // namespace eval_detail

// One row per report. Columns are the union of (K, theta) cells over all
// reports, each K followed by its average; absent cells render as "--".
inline std::string render_report(const std::vector<RecallReport>& reports, RenderFormat fmt) {
  std::set<int> ks;
  std::map<int, std::set<double>> thetas;
  for (const auto& r : reports) {
    for (const auto& [key, v] : r.cells) {
      ks.insert(key.first);
      thetas[key.first].insert(key.second);
    }
  }
  if (reports.empty()) {
    const auto c = BenchmarkConvention::long_form();
    for (int k : c.ranks) {
      ks.insert(k);
      thetas[k].insert(c.iou_thresholds.begin(), c.iou_thresholds.end());
    }
  }
  std::vector<std::string> header{"Dataset", "N"};
  for (int k : ks) {
    for (double t : thetas[k]) header.push_back("R@" + std::to_string(k) + "@" + eval_detail::theta_label(t));
    header.push_back("R@" + std::to_string(k) + " Avg");
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    std::vector<std::string> row{r.name(), std::to_string(r.n_queries)};
    for (int k : ks) {
      for (double t : thetas[k]) {
        auto it = r.cells.find({k, t});
        row.push_back(eval_detail::pct(it == r.cells.end() ? std::nullopt : std::optional<double>(it->second)));
      }
      auto a = r.averages.find(k);
      row.push_back(eval_detail::pct(a == r.averages.end() ? std::nullopt : std::optional<double>(a->second)));
    }
    rows.push_back(std::move(row));
  }
  return render_grid(header, rows, fmt);
}

// Train sets down the side, test sets across the top. Diagonal cells are
// wrapped in [..] (text) or **..** (markdown); csv stays plain.
inline std::string render_matrix(const CrossMatrix& m, RenderFormat fmt) {
  std::vector<std::string> header{"Train \\ Test"};
  for (const auto& c : m.cols) header.push_back(c.display_name());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    std::vector<std::string> row{m.rows[i].display_name()};
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
      std::string v = eval_detail::pct(m.cells[i][j]);
      if (m.rows[i] == m.cols[j] && m.cells[i][j]) {
        if (fmt == RenderFormat::AlignedText) v = "[" + v + "]";
        if (fmt == RenderFormat::Markdown) v = "**" + v + "**";
      }
      row.push_back(std::move(v));
    }
    rows.push_back(std::move(row));
  }
  return render_grid(header, rows, fmt);
}

}  // namespace vtg
