#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "vtg/corpus.hpp"
#include "vtg/kernels.hpp"
#include "vtg/rng.hpp"

using namespace vtg;

// ---- rng ---------------------------------------------------------------------

TEST(Rng, DeterministicAndStreamSeparated) {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  const CounterRng root(1);
  auto s1 = root.split("naq"), s2 = root.split("naq"), s3 = root.split("coin");
  EXPECT_EQ(s1(), s2());
  EXPECT_NE(s1(), s3());
  EXPECT_NE(root.split(0)(), root.split(1)());
}

TEST(Rng, BelowIsUniform) {
  CounterRng rng(2024);
  constexpr int kBins = 7, kDraws = 70000;
  std::vector<double> counts(kBins, 0.0);
  for (int i = 0; i < kDraws; ++i) counts[rng.below(kBins)] += 1.0;
  double chi2 = 0.0;
  const double expected = static_cast<double>(kDraws) / kBins;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(kBins - 1);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.001);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Rng, ShuffleIsAPermutation) {
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i;
  CounterRng rng(9);
  shuffle(v, rng);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
  EXPECT_NE(v, sorted);
}

// ---- corpus -----------------------------------------------------------------

namespace {

std::vector<CanonicalRecord> synthetic_corpus(const std::vector<DatasetId>& sets, int videos, int queries,
                                              Split split = Split::Train) {
  std::vector<CanonicalRecord> out;
  for (const auto& d : sets) {
    for (int v = 0; v < videos; ++v) {
      for (int q = 0; q < queries; ++q) {
        out.push_back(make_record(d, d.slug() + "-v" + std::to_string(v), 100.0, {1.0 * q, 1.0 * q + 3},
                                  "query " + std::to_string(q), split));
      }
    }
  }
  return out;
}

std::map<std::string, const CanonicalRecord*> by_uid(const std::vector<CanonicalRecord>& c) {
  std::map<std::string, const CanonicalRecord*> m;
  for (const auto& r : c) m[r.uid] = &r;
  return m;
}

}  // namespace

TEST(SamplingPlan, StageDefaults) {
  const auto one = SamplingPlan::stage_one();
  EXPECT_EQ(one.batch_size(), 80u);
  EXPECT_EQ(one.replicas, 8);
  const auto two = SamplingPlan::stage_two();
  EXPECT_EQ(two.batch_size(), 40u);
  const auto parsed = parse_sampling_plan(nlohmann::json::parse(R"({"stage": "II", "seed": 5, "replicas": 2})"));
  EXPECT_EQ(parsed.datasets, DatasetId::target_sets());
  EXPECT_EQ(parsed.seed, 5u);
  EXPECT_EQ(parsed.replicas, 2);
  EXPECT_THROW(parse_sampling_plan(nlohmann::json::parse(R"({"stage": "III"})")), ValidationError);
  EXPECT_THROW(parse_sampling_plan(nlohmann::json::parse(R"({"replicas": 0})")), ValidationError);
}

TEST(Sampler, BalancedBatches) {
  const auto plan = SamplingPlan::stage_one(11);
  const auto corpus = synthetic_corpus(plan.datasets, 12, 5);
  const auto index = by_uid(corpus);
  const auto batches = build_epoch(plan, corpus, 20);
  ASSERT_EQ(batches.size(), 20u * 8u);
  for (const auto& b : batches) {
    ASSERT_EQ(b.uids.size(), 80u);
    std::map<std::string, std::map<std::string, int>> per;
    for (const auto& u : b.uids) {
      const auto* r = index.at(u);
      ++per[r->dataset.slug()][r->video.video_id];
    }
    ASSERT_EQ(per.size(), 5u);
    for (const auto& [ds, videos] : per) {
      EXPECT_EQ(videos.size(), 8u) << ds;
      for (const auto& [v, n] : videos) EXPECT_EQ(n, 2) << v;
    }
  }
}

TEST(Sampler, DeterministicAcrossWorkerCounts) {
  const auto plan = SamplingPlan::stage_one(3);
  const auto corpus = synthetic_corpus(plan.datasets, 10, 3);
  EXPECT_EQ(build_epoch(plan, corpus, 5, 1), build_epoch(plan, corpus, 5, 4));
  auto other = plan;
  other.seed = 4;
  EXPECT_NE(build_epoch(plan, corpus, 5), build_epoch(other, corpus, 5));
}

TEST(Sampler, ReplicasDiffer) {
  const auto plan = SamplingPlan::stage_one(3);
  const auto corpus = synthetic_corpus(plan.datasets, 20, 3);
  const auto batches = build_epoch(plan, corpus, 1);
  EXPECT_NE(batches[0].uids, batches[1].uids);
}

TEST(Sampler, VideoCoverageWithoutReplacement) {
  auto plan = SamplingPlan::stage_one(8);
  plan.replicas = 1;
  const auto corpus = synthetic_corpus(plan.datasets, 16, 2);
  const auto index = by_uid(corpus);
  // Two iterations consume the 16-video pool exactly once per dataset.
  const auto batches = build_epoch(plan, corpus, 2);
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& b : batches) {
    for (const auto& u : b.uids) seen[index.at(u)->dataset.slug()].insert(index.at(u)->video.video_id);
  }
  for (const auto& [ds, vids] : seen) EXPECT_EQ(vids.size(), 16u) << ds;
}

TEST(Sampler, QueriesWithReplacementWhenVideoIsShort) {
  auto plan = SamplingPlan::stage_one(1);
  plan.replicas = 1;
  const auto corpus = synthetic_corpus(plan.datasets, 8, 1);
  const auto batches = build_epoch(plan, corpus, 1);
  EXPECT_EQ(batches[0].uids.size(), 80u);
}

TEST(Sampler, InsufficientCorpus) {
  const auto plan = SamplingPlan::stage_one();
  auto corpus = synthetic_corpus(plan.datasets, 8, 2);
  auto sparse = synthetic_corpus({DatasetId::Kind::NaQ}, 3, 2);
  std::vector<CanonicalRecord> mixed;
  for (const auto& r : corpus) {
    if (r.dataset != DatasetId(DatasetId::Kind::NaQ)) mixed.push_back(r);
  }
  mixed.insert(mixed.end(), sparse.begin(), sparse.end());
  try {
    EpochSampler s(plan, mixed);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()), "insufficient corpus: naq has 3 train videos, needs 8");
  }
}

TEST(Sampler, IgnoresNonTrainSplits) {
  const auto plan = SamplingPlan::stage_one();
  const auto corpus = synthetic_corpus(plan.datasets, 8, 2, Split::Val);
  EXPECT_THROW(EpochSampler(plan, corpus), ValidationError);
}

TEST(Merge, FirstUidWinsAndSorted) {
  auto a = synthetic_corpus({DatasetId::Kind::Coin}, 2, 2);
  auto b = synthetic_corpus({DatasetId::Kind::NaQ, DatasetId::Kind::Coin}, 2, 2);
  const auto merged = merge_corpora({b, a});
  EXPECT_EQ(merged.size(), 8u);
  for (std::size_t i = 1; i < merged.size(); ++i) {
    const auto& p = merged[i - 1];
    const auto& q = merged[i];
    EXPECT_LE(std::make_tuple(p.dataset.slug(), p.video.video_id, p.span.start),
              std::make_tuple(q.dataset.slug(), q.video.video_id, q.span.start));
  }
}

TEST(Manifest, RoundTrip) {
  const auto plan = SamplingPlan::stage_two(2);
  const auto batches = build_epoch(plan, synthetic_corpus(plan.datasets, 6, 3), 3);
  std::stringstream io;
  EXPECT_EQ(export_batches(batches, io), batches.size());
  EXPECT_EQ(read_batches(io), batches);
  std::istringstream bad("{\"iter\": 0}\n");
  EXPECT_THROW(read_batches(bad), ValidationError);
}

// ---- focal loss --------------------------------------------------------------

namespace {

// Independent reference for the focal value.
double focal_ref(double p, int y, double a, double g) {
  const double pt = y == 1 ? p : 1 - p;
  return -a * std::pow(1 - pt, g) * std::log(pt);
}

double central_fd(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

bool fd_close(double a, double f) {
  return std::abs(a - f) <= 1e-5 * std::max(std::abs(a), std::abs(f)) || std::abs(a - f) <= 1e-10;
}

}  // namespace

TEST(Focal, KnownValues) {
  EXPECT_NEAR(focal_loss(0.5, 1).value, 0.25 * 0.25 * std::log(2.0), 1e-15);
  EXPECT_NEAR(focal_loss(0.5, 1).value, 0.043322, 5e-7);
  EXPECT_EQ(focal_loss(1.0, 1).value, 0.0);
  EXPECT_EQ(focal_loss(0.0, 0).value, 0.0);
  EXPECT_NEAR(focal_loss(0.9, 0).value, focal_ref(0.9, 0, 0.25, 2), 1e-15);
}

TEST(Focal, GammaZeroIsWeightedCrossEntropy) {
  const FocalParams p{0.25, 0.0};
  for (double x : {0.1, 0.4, 0.77}) {
    EXPECT_NEAR(focal_loss(x, 1, p).value, -0.25 * std::log(x), 1e-15);
    EXPECT_NEAR(focal_loss(x, 1, p).d_dp, -0.25 / x, 1e-12);
  }
}

TEST(Focal, GradientMatchesFiniteDifference) {
  for (double g : {0.0, 0.5, 1.0, 2.0, 3.5}) {
    for (int y : {0, 1}) {
      for (double p = 0.05; p < 0.96; p += 0.05) {
        const FocalParams params{0.25, g};
        const double a = focal_loss(p, y, params).d_dp;
        const double f = central_fd([&](double x) { return focal_ref(x, y, 0.25, g); }, p);
        EXPECT_TRUE(fd_close(a, f)) << "g=" << g << " y=" << y << " p=" << p << " a=" << a << " f=" << f;
      }
    }
  }
}

TEST(Focal, Errors) {
  EXPECT_THROW(focal_loss(0.0, 1), ValidationError);
  EXPECT_THROW(focal_loss(1.0, 0), ValidationError);
  EXPECT_THROW(focal_loss(0.5, 2), ValidationError);
  EXPECT_THROW(focal_loss(1.5, 1), ValidationError);
  EXPECT_THROW(focal_loss(0.5, 1, {1.5, 2.0}), ValidationError);
  EXPECT_THROW(focal_loss(0.5, 1, {0.25, -1.0}), ValidationError);
}

// ---- DIoU ------------------------------------------------------------------

namespace {

// Independent DIoU loss: explicit intervals, no shared helpers.
double diou_loss_ref(double s, double e, double g1, double g2) {
  const double lo = std::max(s, g1), hi = std::min(e, g2);
  const double inter = hi > lo ? hi - lo : 0.0;
  const double uni = (e - s) + (g2 - g1) - inter;
  const double iou = uni > 0 ? inter / uni : 0.0;
  const double c = std::max(e, g2) - std::min(s, g1);
  const double d = (s + e) / 2 - (g1 + g2) / 2;
  return 1.0 - (iou - d * d / (c * c));
}

}  // namespace

TEST(Diou, FixtureValues) {
  EXPECT_NEAR(diou_loss({0, 2}, {4, 6}).value, 1.0 + 16.0 / 36.0, 1e-12);
  EXPECT_NEAR(diou_loss({0, 2}, {4, 6}).value, 1.4444, 5e-5);
  EXPECT_NEAR(diou_loss({0, 10}, {5, 15}).value, 1.0 - (1.0 / 3.0 - 25.0 / 225.0), 1e-12);
  EXPECT_NEAR(diou_loss({0, 10}, {5, 15}).value, 0.7778, 5e-5);
  EXPECT_NEAR(diou_loss({3, 9}, {3, 9}).value, 0.0, 1e-15);
}

TEST(Diou, Invariants) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 5000; ++i) {
    double a = u(gen), b = u(gen), c = u(gen), d = u(gen);
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    const double v = diou_1d({a, b}, {c, d});
    EXPECT_GE(v, -1.0 - 1e-12);
    EXPECT_LE(v, 1.0 + 1e-12);
    EXPECT_NEAR(v, diou_1d({c, d}, {a, b}), 1e-12);
    EXPECT_NEAR(diou_loss({a, b}, {c, d}).value, diou_loss_ref(a, b, c, d), 1e-12);
    const double shift = u(gen);
    EXPECT_NEAR(v, diou_1d({a + shift, b + shift}, {c + shift, d + shift}), 1e-9);
  }
}

TEST(Diou, GradientMatchesFiniteDifference) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  int checked = 0;
  while (checked < 2000) {
    double s = u(gen), e = u(gen), g1 = u(gen), g2 = u(gen);
    if (s > e) std::swap(s, e);
    if (g1 > g2) std::swap(g1, g2);
    const double pts[] = {s, e, g1, g2};
    bool near_kink = e - s < 1e-3 || g2 - g1 < 1e-3;
    for (int i = 0; i < 2; ++i) {
      for (int j = 2; j < 4; ++j) near_kink |= std::abs(pts[i] - pts[j]) <= 1e-3;
    }
    if (near_kink) continue;
    ++checked;
    const auto r = diou_loss({s, e}, {g1, g2});
    const double fs = central_fd([&](double x) { return diou_loss_ref(x, e, g1, g2); }, s);
    const double fe = central_fd([&](double x) { return diou_loss_ref(s, x, g1, g2); }, e);
    EXPECT_TRUE(fd_close(r.d_start, fs)) << s << " " << e << " " << g1 << " " << g2 << ": " << r.d_start
                                         << " vs " << fs;
    EXPECT_TRUE(fd_close(r.d_end, fe)) << s << " " << e << " " << g1 << " " << g2 << ": " << r.d_end
                                       << " vs " << fe;
  }
}

TEST(Diou, RightDerivativeAtAlignedBoundaries) {
  // pred.start == gt.start: moving start right shrinks the intersection.
  const auto r = diou_loss({2, 8}, {2, 6});
  const double h = 1e-7;
  const double right = (diou_loss_ref(2 + h, 8, 2, 6) - diou_loss_ref(2, 8, 2, 6)) / h;
  EXPECT_NEAR(r.d_start, right, 1e-5);
  const double right_e = (diou_loss_ref(2, 8 + h, 2, 6) - diou_loss_ref(2, 8, 2, 6)) / h;
  EXPECT_NEAR(r.d_end, right_e, 1e-5);
}

TEST(Diou, DegenerateAndInvalid) {
  EXPECT_EQ(diou_1d({4, 4}, {4, 4}), 1.0);
  EXPECT_EQ(diou_loss({4, 4}, {4, 4}).value, 0.0);
  EXPECT_THROW(diou_loss({5, 4}, {0, 1}), ValidationError);
  EXPECT_THROW(diou_1d({0, 1}, {-1, 1}), ValidationError);
}

TEST(TotalLoss, WeightsAndValidation) {
  EXPECT_DOUBLE_EQ(total_loss(1.0, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(total_loss(1.0, 2.0, 0.5, {2.0, 0.5}), 3.5);
  EXPECT_THROW(total_loss(NAN, 1.0), ValidationError);
  EXPECT_THROW(total_loss(1.0, 1.0, 0.0, {-1.0, 1.0}), ValidationError);
}
