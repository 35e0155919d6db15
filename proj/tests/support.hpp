#pragma once

// Generators and fixtures shared by the unit tests and the acceptance runner.

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vtg/eval.hpp"
#include "vtg/grounder.hpp"

namespace vtg::fixtures {

// ---- random evaluation instances -------------------------------------------

struct EvalInstance {
  std::vector<PredictionSet> preds;
  GroundTruth gts;
  BenchmarkConvention convention;
};

inline TimeSpan random_span(std::mt19937_64& gen, double duration, bool on_grid) {
  std::uniform_real_distribution<double> u(0.0, duration);
  double a = u(gen), b = u(gen);
  if (on_grid) {
    // Half-second grid produces exact IoU ties and boundary hits.
    a = std::round(a * 2.0) / 2.0;
    b = std::round(b * 2.0) / 2.0;
  }
  if (a > b) std::swap(a, b);
  return {a, b};
}

inline EvalInstance random_instance(std::mt19937_64& gen) {
  EvalInstance e;
  std::uniform_int_distribution<int> nq(1, 50), nc(0, 10), coin(0, 3);
  std::uniform_real_distribution<double> dur(5.0, 600.0), score(0.0, 1.0);
  e.convention = coin(gen) == 0 ? BenchmarkConvention::short_form() : BenchmarkConvention::long_form();
  const int queries = nq(gen);
  for (int q = 0; q < queries; ++q) {
    const std::string uid = "q" + std::to_string(q);
    const double d = dur(gen);
    const bool grid = coin(gen) == 0;
    e.gts[uid] = random_span(gen, d, grid);
    if (coin(gen) == 0 && q % 5 == 0) continue;  // missing prediction
    PredictionSet p;
    p.uid = uid;
    const int cands = nc(gen);
    for (int c = 0; c < cands; ++c) {
      // Coarse scores create ties that exercise the ranking rule.
      const double s = coin(gen) == 0 ? std::round(score(gen) * 4.0) / 4.0 : score(gen);
      p.candidates.push_back({random_span(gen, d, grid), s});
    }
    std::shuffle(p.candidates.begin(), p.candidates.end(), gen);
    e.preds.push_back(std::move(p));
  }
  return e;
}

// ---- planted-segment generator -----------------------------------------------

struct PlantedTrial {
  FeatureSequence features;
  QueryEmbedding query;
  TimeSpan truth;
};

inline std::vector<float> unit_vector(std::mt19937_64& gen, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = n(gen);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

// L=200 frames at 2 fps, D=64. A 20-frame span carries the query vector plus
// gaussian noise; every other frame is an independent random unit vector.
inline PlantedTrial planted_trial(std::mt19937_64& gen, double sigma, std::uint32_t length = 200,
                                  std::uint32_t dim = 64, std::uint32_t gt_frames = 20, float fps = 2.0f) {
  PlantedTrial t;
  t.query.uid = "planted";
  t.query.vector = unit_vector(gen, dim);
  std::uniform_int_distribution<std::uint32_t> pick(0, length - gt_frames);
  const std::uint32_t g0 = pick(gen);
  std::normal_distribution<double> noise(0.0, sigma);
  t.features.video_id = "synthetic";
  t.features.fps = fps;
  t.features.length = length;
  t.features.dim = dim;
  t.features.data.reserve(static_cast<std::size_t>(length) * dim);
  for (std::uint32_t i = 0; i < length; ++i) {
    if (i >= g0 && i < g0 + gt_frames) {
      for (std::uint32_t k = 0; k < dim; ++k) {
        t.features.data.push_back(static_cast<float>(t.query.vector[k] + noise(gen)));
      }
    } else {
      const auto r = unit_vector(gen, dim);
      t.features.data.insert(t.features.data.end(), r.begin(), r.end());
    }
  }
  t.truth = {g0 / static_cast<double>(fps), (g0 + gt_frames) / static_cast<double>(fps)};
  return t;
}

struct PlantedSummary {
  double recall_at_1 = 0.0;  // fraction of trials with top-1 IoU >= 0.5
  double mean_top1_iou = 0.0;
};

inline PlantedSummary run_planted(double sigma, int trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  PlantedSummary s;
  int hits = 0;
  double iou_sum = 0.0;
  for (int i = 0; i < trials; ++i) {
    const auto t = planted_trial(gen, sigma);
    const auto p = ground(t.features, t.query);
    const double iou = p.candidates.empty() ? 0.0 : temporal_iou(p.candidates.front().span, t.truth);
    if (iou >= 0.5) ++hits;
    iou_sum += iou;
  }
  s.recall_at_1 = static_cast<double>(hits) / trials;
  s.mean_top1_iou = iou_sum / trials;
  return s;
}

// ---- table fixtures ----------------------------------------------------------

// Cross-dataset average R@1: rows are the training set, columns the test set.
inline std::map<CrossKey, double> cross_dataset_fixture() {
  const std::vector<DatasetId> sets{DatasetId::Kind::Ego4dNlq, DatasetId::Kind::Tacos,
                                    DatasetId::Kind::CharadesSta, DatasetId::Kind::ActivityNetCaptions};
  const double v[4][4] = {{19.55, 20.18, 23.50, 13.16},
                          {3.39, 56.70, 13.23, 10.78},
                          {4.35, 12.92, 62.35, 9.35},
                          {3.93, 13.97, 22.43, 39.52}};
  std::map<CrossKey, double> m;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) m[{sets[i], sets[j]}] = v[i][j];
  }
  return m;
}

inline std::vector<DatasetId> cross_dataset_order() {
  return {DatasetId::Kind::Ego4dNlq, DatasetId::Kind::Tacos, DatasetId::Kind::CharadesSta,
          DatasetId::Kind::ActivityNetCaptions};
}

// 10,000 TACoS queries whose best top-1 IoU lands in three bands: 5311 at or
// above 0.5, 1160 in [0.3, 0.5), 3529 below 0.3. Gives R@1 cells 64.71 / 53.11.
inline std::pair<std::vector<PredictionSet>, GroundTruth> tacos_row_fixture() {
  std::vector<PredictionSet> preds;
  GroundTruth gts;
  for (int i = 0; i < 10000; ++i) {
    const std::string uid = "t" + std::to_string(i);
    gts[uid] = {0.0, 10.0};
    TimeSpan top;
    if (i < 5311) {
      top = {0.0, 6.0};  // IoU 0.6
    } else if (i < 5311 + 1160) {
      top = {0.0, 4.0};  // IoU 0.4
    } else {
      top = {0.0, 1.0};  // IoU 0.1
    }
    preds.push_back({uid, {{top, 1.0}}, {}});
  }
  return {preds, gts};
}

}  // namespace vtg::fixtures
