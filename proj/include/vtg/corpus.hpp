#pragma once

// Corpus merging and balanced multi-dataset batch construction.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "vtg/core.hpp"
#include "vtg/error.hpp"
#include "vtg/ingest.hpp"
#include "vtg/rng.hpp"

namespace vtg {

struct SamplingPlan {
  Stage stage = Stage::Pretraining;
  std::vector<DatasetId> datasets;
  int videos_per_dataset = 8;
  int queries_per_video = 2;
  int replicas = 8;
  std::uint64_t seed = 0;
  // Epochs are iteration-driven; small datasets recycle within one.
  int iterations_per_epoch = 1000;

  static SamplingPlan stage_one(std::uint64_t seed = 0) {
    SamplingPlan p;
    p.stage = Stage::Pretraining;
    p.datasets = DatasetId::pretraining_sets();
    p.seed = seed;
    return p;
  }

  static SamplingPlan stage_two(std::uint64_t seed = 0) {
    SamplingPlan p;
    p.stage = Stage::Target;
    p.datasets = DatasetId::target_sets();
    p.videos_per_dataset = 4;
    p.queries_per_video = 2;
    p.replicas = 1;
    p.seed = seed;
    return p;
  }

  std::size_t batch_size() const {
    return datasets.size() * static_cast<std::size_t>(videos_per_dataset) *
           static_cast<std::size_t>(queries_per_video);
  }

  void validate() const {
    if (datasets.empty()) throw ValidationError("sampling plan has no datasets");
    if (videos_per_dataset <= 0 || queries_per_video <= 0 || replicas <= 0 ||
        iterations_per_epoch <= 0) {
      throw ValidationError("sampling plan counts must be positive");
    }
    std::unordered_set<std::string> seen;
    for (const auto& d : datasets) {
      if (!seen.insert(d.slug()).second) throw ValidationError("duplicate dataset in plan: " + d.slug());
    }
  }
};

// Reads a plan from JSON. "stage" selects the defaults; any other key overrides.
inline SamplingPlan parse_sampling_plan(const nlohmann::json& j) {
  SamplingPlan p;
  try {
    std::string stage = j.value("stage", std::string("I"));
    if (stage == "I" || stage == "1" || stage == "pretraining") {
      p = SamplingPlan::stage_one();
    } else if (stage == "II" || stage == "2" || stage == "target") {
      p = SamplingPlan::stage_two();
    } else {
      throw ValidationError("unknown stage '" + stage + "'");
    }
    if (j.contains("datasets")) {
      p.datasets.clear();
      for (const auto& d : j.at("datasets")) p.datasets.push_back(DatasetId::parse(d.get<std::string>()));
    }
    p.videos_per_dataset = j.value("videos_per_dataset", p.videos_per_dataset);
    p.queries_per_video = j.value("queries_per_video", p.queries_per_video);
    p.replicas = j.value("replicas", p.replicas);
    p.seed = j.value("seed", p.seed);
    p.iterations_per_epoch = j.value("iterations_per_epoch", p.iterations_per_epoch);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad sampling plan: ") + e.what());
  }
  p.validate();
  return p;
}

struct Batch {
  int iteration = 0;
  int replica = 0;
  std::vector<std::string> uids;

  friend bool operator==(const Batch&, const Batch&) = default;
};

// Concatenates parts, keeps the first record per uid, and orders by
// (dataset, video_id, start) with ties in input order.
inline std::vector<CanonicalRecord> merge_corpora(const std::vector<std::vector<CanonicalRecord>>& parts) {
  std::vector<CanonicalRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& part : parts) {
    for (const auto& r : part) {
      if (seen.insert(r.uid).second) out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const CanonicalRecord& a, const CanonicalRecord& b) {
    if (a.dataset.slug() != b.dataset.slug()) return a.dataset.slug() < b.dataset.slug();
    if (a.video.video_id != b.video.video_id) return a.video.video_id < b.video.video_id;
    return a.span.start < b.span.start;
  });
  return out;
}

namespace corpus_detail {

struct VideoGroup {
  std::string video_id;
  std::vector<std::size_t> queries;  // indices into the sampler's uid table
};

struct DatasetPool {
  std::vector<VideoGroup> videos;
};

// Per (dataset, replica) state: a shuffled video order consumed front to back.
struct Stream {
  CounterRng rng{0};
  std::vector<std::uint32_t> order;
  std::size_t pos = 0;
};

}  // namespace corpus_detail

// Deterministic balanced sampler. Each (dataset, replica) pair owns an independent
// random stream, so replicas can be generated concurrently without coordination.
class EpochSampler {
 public:
  EpochSampler(SamplingPlan plan, const std::vector<CanonicalRecord>& corpus) : plan_(std::move(plan)) {
    plan_.validate();
    std::unordered_map<std::string, std::size_t> ds_index;
    for (std::size_t d = 0; d < plan_.datasets.size(); ++d) ds_index[plan_.datasets[d].slug()] = d;
    pools_.resize(plan_.datasets.size());
    std::vector<std::unordered_map<std::string, std::size_t>> video_index(plan_.datasets.size());
    for (const auto& r : corpus) {
      if (r.split != Split::Train) continue;
      auto it = ds_index.find(r.dataset.slug());
      if (it == ds_index.end()) continue;
      auto& pool = pools_[it->second];
      auto [v, fresh] = video_index[it->second].emplace(r.video.video_id, pool.videos.size());
      if (fresh) pool.videos.push_back({r.video.video_id, {}});
      pool.videos[v->second].queries.push_back(uids_.size());
      uids_.push_back(r.uid);
    }
    for (std::size_t d = 0; d < pools_.size(); ++d) {
      if (pools_[d].videos.size() < static_cast<std::size_t>(plan_.videos_per_dataset)) {
        throw ValidationError("insufficient corpus: " + plan_.datasets[d].slug() + " has " +
                              std::to_string(pools_[d].videos.size()) + " train videos, needs " +
                              std::to_string(plan_.videos_per_dataset));
      }
    }
    const CounterRng root(plan_.seed);
    streams_.resize(static_cast<std::size_t>(plan_.replicas));
    for (int r = 0; r < plan_.replicas; ++r) {
      for (std::size_t d = 0; d < pools_.size(); ++d) {
        corpus_detail::Stream s;
        s.rng = root.split(plan_.datasets[d].slug()).split(static_cast<std::uint64_t>(r));
        s.order.resize(pools_[d].videos.size());
        for (std::uint32_t i = 0; i < s.order.size(); ++i) s.order[i] = i;
        shuffle(s.order, s.rng);
        streams_[static_cast<std::size_t>(r)].push_back(std::move(s));
      }
    }
  }

  const SamplingPlan& plan() const { return plan_; }

  // Batches for the next iteration, one per replica, in replica order.
  std::vector<Batch> next(unsigned workers = 1) {
    std::vector<Batch> out(static_cast<std::size_t>(plan_.replicas));
    auto run = [&](int r) { out[static_cast<std::size_t>(r)] = make_batch(iteration_, r); };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(plan_.replicas)));
    if (workers == 1) {
      for (int r = 0; r < plan_.replicas; ++r) run(r);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (int r = static_cast<int>(w); r < plan_.replicas; r += static_cast<int>(workers)) run(r);
        });
      }
      for (auto& t : pool) t.join();
    }
    ++iteration_;
    return out;
  }

  int iteration() const { return iteration_; }

 private:
  Batch make_batch(int iteration, int replica) {
    Batch b;
    b.iteration = iteration;
    b.replica = replica;
    b.uids.reserve(plan_.batch_size());
    auto& streams = streams_[static_cast<std::size_t>(replica)];
    for (std::size_t d = 0; d < pools_.size(); ++d) {
      auto& s = streams[d];
      const auto& pool = pools_[d];
      for (std::uint32_t v : take_videos(s, static_cast<std::size_t>(plan_.videos_per_dataset))) {
        append_queries(b.uids, pool.videos[v], s.rng);
      }
    }
    return b;
  }

  // Next k distinct videos; reshuffles the pool when it runs dry.
  static std::vector<std::uint32_t> take_videos(corpus_detail::Stream& s, std::size_t k) {
    std::vector<std::uint32_t> picked;
    picked.reserve(k);
    while (picked.size() < k) {
      if (s.pos == s.order.size()) {
        shuffle(s.order, s.rng);
        s.pos = 0;
        // Keep the batch free of repeats across the reshuffle boundary.
        for (std::size_t i = 0; i < s.order.size() && i < k - picked.size(); ++i) {
          if (std::find(picked.begin(), picked.end(), s.order[i]) == picked.end()) continue;
          for (std::size_t j = k - picked.size(); j < s.order.size(); ++j) {
            if (std::find(picked.begin(), picked.end(), s.order[j]) == picked.end()) {
              std::swap(s.order[i], s.order[j]);
              break;
            }
          }
        }
      }
      picked.push_back(s.order[s.pos++]);
    }
    return picked;
  }

  void append_queries(std::vector<std::string>& out, const corpus_detail::VideoGroup& v,
                      CounterRng& rng) const {
    const auto q = static_cast<std::size_t>(plan_.queries_per_video);
    const std::size_t n = v.queries.size();
    if (n >= q) {
      // Partial Fisher-Yates: first q of a random permutation.
      std::vector<std::size_t> idx(v.queries);
      for (std::size_t i = 0; i < q; ++i) {
        std::swap(idx[i], idx[i + rng.below(n - i)]);
        out.push_back(uids_[idx[i]]);
      }
    } else {
      for (std::size_t i = 0; i < q; ++i) out.push_back(uids_[v.queries[rng.below(n)]]);
    }
  }

  SamplingPlan plan_;
  std::vector<corpus_detail::DatasetPool> pools_;
  std::vector<std::string> uids_;
  std::vector<std::vector<corpus_detail::Stream>> streams_;  // [replica][dataset]
  int iteration_ = 0;
};

// One epoch (plan.iterations_per_epoch iterations, or an explicit count), all replicas.
inline std::vector<Batch> build_epoch(const SamplingPlan& plan, const std::vector<CanonicalRecord>& corpus,
                                      std::optional<int> iterations = std::nullopt,
                                      unsigned workers = 1) {
  EpochSampler sampler(plan, corpus);
  const int n = iterations.value_or(plan.iterations_per_epoch);
  std::vector<Batch> out;
  out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(plan.replicas));
  for (int i = 0; i < n; ++i) {
    for (auto& b : sampler.next(workers)) out.push_back(std::move(b));
  }
  return out;
}

inline std::size_t export_batches(const std::vector<Batch>& batches, std::ostream& sink) {
  for (const auto& b : batches) {
    nlohmann::ordered_json j;
    j["iter"] = b.iteration;
    j["replica"] = b.replica;
    j["uids"] = b.uids;
    sink << j.dump() << '\n';
  }
  if (!sink) throw IoError("failed writing batch manifest");
  return batches.size();
}

inline std::vector<Batch> read_batches(std::istream& in) {
  std::vector<Batch> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("iter").get<int>(), j.at("replica").get<int>(),
                     j.at("uids").get<std::vector<std::string>>()});
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("bad batch manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vtg
