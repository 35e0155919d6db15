#pragma once

// Similarity grounder: cosine frame relevance, multi-scale sliding-window
// proposals, greedy NMS. A deterministic stand-in for a learned grounding head,
// plus the binary feature format and the prediction file format.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <exception>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "vtg/canonical_form.hpp"
#include "vtg/core.hpp"
#include "vtg/error.hpp"

namespace vtg {

struct FeatureSequence {
  std::string video_id;
  float fps = 2.0f;
  std::uint32_t length = 0;  // L
  std::uint32_t dim = 0;     // D
  std::vector<float> data;   // L x D, frame-major

  const float* row(std::size_t i) const { return data.data() + i * dim; }
  double duration() const { return static_cast<double>(length) / static_cast<double>(fps); }
};

struct QueryEmbedding {
  std::string uid;
  std::vector<float> vector;
};

struct Candidate {
  TimeSpan span;
  double score = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct PredictionSet {
  std::string uid;
  std::vector<Candidate> candidates;
  std::vector<std::string> diagnostics;  // not serialized
};

struct GrounderConfig {
  std::vector<double> window_lengths{5.0, 10.0, 20.0, 40.0};
  double stride = 2.5;
  double nms_iou = 0.5;
  int top_k = 5;

  void validate() const {
    if (window_lengths.empty()) throw ValidationError("no window lengths");
    for (double w : window_lengths) {
      if (!(w > 0.0)) throw ValidationError("window lengths must be positive");
    }
    if (!std::is_sorted(window_lengths.begin(), window_lengths.end())) {
      throw ValidationError("window lengths must be sorted ascending");
    }
    if (!(stride > 0.0)) throw ValidationError("stride must be positive");
    if (!(nms_iou > 0.0 && nms_iou < 1.0)) throw ValidationError("nms_iou must lie in (0,1)");
    if (top_k <= 0) throw ValidationError("top_k must be positive");
  }
};

// Score descending, then earlier start, then shorter span.
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.span.start != b.span.start) return a.span.start < b.span.start;
  return span_length(a.span) < span_length(b.span);
}

// ---- binary feature format -------------------------------------------------

namespace feature_io {

inline constexpr char kMagic[4] = {'V', 'T', 'G', 'F'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 20;

template <class T>
T from_le(const unsigned char* p) {
  static_assert(sizeof(T) == 4);
  std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                    (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<T>(u);
}

template <class T>
void put_le(std::string& out, T v) {
  static_assert(sizeof(T) == 4);
  const auto u = std::bit_cast<std::uint32_t>(v);
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((u >> s) & 0xff));
}

// Reads exactly n bytes or throws with the offset where the stream ran dry.
inline void read_exact(std::istream& in, unsigned char* dst, std::size_t n, std::size_t offset,
                       const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != n) {
    throw FormatError(std::string("truncated ") + what + ": expected " + std::to_string(n) +
                          " bytes, got " + std::to_string(got),
                      offset + got);
  }
}

}  // namespace feature_io

inline FeatureSequence read_features(std::istream& in, std::string video_id = {}) {
  using namespace feature_io;
  unsigned char h[kHeaderBytes];
  read_exact(in, h, 4, 0, "header");
  if (std::memcmp(h, kMagic, 4) != 0) throw FormatError("bad magic", 0);
  read_exact(in, h + 4, kHeaderBytes - 4, 4, "header");
  const auto version = from_le<std::uint32_t>(h + 4);
  if (version != kVersion) throw FormatError("unsupported version " + std::to_string(version), 4);
  FeatureSequence f;
  f.video_id = std::move(video_id);
  f.length = from_le<std::uint32_t>(h + 8);
  f.dim = from_le<std::uint32_t>(h + 12);
  f.fps = from_le<float>(h + 16);
  if (f.length == 0) throw FormatError("empty sequence", 8);
  if (f.dim == 0) throw FormatError("zero feature dimension", 12);
  if (!(f.fps > 0.0f) || !std::isfinite(f.fps)) throw FormatError("fps must be positive", 16);

  const std::size_t count = static_cast<std::size_t>(f.length) * f.dim;
  std::vector<unsigned char> payload(count * 4);
  read_exact(in, payload.data(), payload.size(), kHeaderBytes, "payload");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("payload longer than L x D", kHeaderBytes + payload.size());
  }
  f.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) f.data[i] = from_le<float>(payload.data() + 4 * i);
  return f;
}

inline FeatureSequence read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  return read_features(in, path.stem().string());
}

inline void write_features(const FeatureSequence& f, std::ostream& out) {
  if (f.length == 0) throw ValidationError("empty sequence");
  if (f.data.size() != static_cast<std::size_t>(f.length) * f.dim) {
    throw ValidationError("feature matrix size does not match L x D");
  }
  std::string buf(feature_io::kMagic, 4);
  feature_io::put_le(buf, feature_io::kVersion);
  feature_io::put_le(buf, f.length);
  feature_io::put_le(buf, f.dim);
  feature_io::put_le(buf, f.fps);
  buf.reserve(buf.size() + f.data.size() * 4);
  for (float v : f.data) feature_io::put_le(buf, v);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing feature file");
}

inline void write_features(const FeatureSequence& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create feature file " + path.string());
  write_features(f, out);
}

struct QueryIndexEntry {
  std::string uid;
  std::string video_id;  // optional extension; empty when absent
};

// Query embeddings share the feature layout (one row per query) plus a
// line-delimited sidecar {"row": i, "uid": "..."}.
inline std::vector<QueryEmbedding> read_queries(std::istream& matrix, std::istream& index,
                                                std::vector<QueryIndexEntry>* entries = nullptr) {
  const FeatureSequence m = read_features(matrix);
  std::vector<QueryIndexEntry> rows(m.length);
  std::vector<char> seen(m.length, 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(index, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto row = j.at("row").get<std::int64_t>();
      if (row < 0 || row >= static_cast<std::int64_t>(m.length)) {
        throw ValidationError("query index line " + std::to_string(lineno) + ": row out of range");
      }
      if (seen[static_cast<std::size_t>(row)]++) {
        throw ValidationError("query index line " + std::to_string(lineno) + ": duplicate row");
      }
      rows[static_cast<std::size_t>(row)] = {j.at("uid").get<std::string>(),
                                             j.value("video_id", std::string())};
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("query index line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (std::size_t r = 0; r < seen.size(); ++r) {
    if (!seen[r]) throw ValidationError("query index has no entry for row " + std::to_string(r));
  }
  std::vector<QueryEmbedding> out(m.length);
  for (std::size_t r = 0; r < m.length; ++r) {
    out[r].uid = rows[r].uid;
    out[r].vector.assign(m.row(r), m.row(r) + m.dim);
  }
  if (entries) *entries = std::move(rows);
  return out;
}

inline void write_queries(const std::vector<QueryEmbedding>& qs, std::ostream& matrix,
                          std::ostream& index) {
  if (qs.empty()) throw ValidationError("empty sequence");
  FeatureSequence m;
  m.length = static_cast<std::uint32_t>(qs.size());
  m.dim = static_cast<std::uint32_t>(qs.front().vector.size());
  for (std::size_t r = 0; r < qs.size(); ++r) {
    if (qs[r].vector.size() != m.dim) throw ValidationError("query dimension mismatch");
    m.data.insert(m.data.end(), qs[r].vector.begin(), qs[r].vector.end());
    nlohmann::ordered_json j;
    j["row"] = r;
    j["uid"] = qs[r].uid;
    index << j.dump() << '\n';
  }
  write_features(m, matrix);
}

// ---- grounding -------------------------------------------------------------

inline std::vector<double> score_frames(const FeatureSequence& f, const QueryEmbedding& q) {
  if (q.vector.size() != f.dim) {
    throw ValidationError("dimension mismatch: features " + std::to_string(f.dim) + ", query " +
                          std::to_string(q.vector.size()));
  }
  double qn = 0.0;
  for (float v : q.vector) qn += static_cast<double>(v) * v;
  qn = std::sqrt(qn);
  std::vector<double> s(f.length, 0.0);
  if (qn == 0.0) return s;
  for (std::size_t i = 0; i < f.length; ++i) {
    const float* r = f.row(i);
    double dot = 0.0, rn = 0.0;
    for (std::size_t k = 0; k < f.dim; ++k) {
      dot += static_cast<double>(r[k]) * q.vector[k];
      rn += static_cast<double>(r[k]) * r[k];
    }
    if (rn > 0.0) s[i] = std::clamp(dot / (std::sqrt(rn) * qn), -1.0, 1.0);
  }
  return s;
}

namespace grounder_detail {

// Frames whose start time falls in [t0, t1); at least the frame containing t0.
inline std::pair<std::size_t, std::size_t> frame_range(double t0, double t1, double fps, std::size_t L) {
  auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(t0 * fps - 1e-9)));
  auto last = static_cast<std::size_t>(std::max(0.0, std::ceil(t1 * fps - 1e-9)));
  first = std::min(first, L - 1);
  last = std::min(std::max(last, first + 1), L);
  return {first, last};
}

// Snaps sums of equal frame scores to identical doubles so exact ties stay ties.
inline double quantize(double v) { return std::round(v * 1e12) / 1e12; }

}  // namespace grounder_detail

// Sliding windows on the stride grid for every window length. A window at
// least as long as the video yields one full-video candidate; otherwise starts
// run k*stride for k = 0..ceil((D - w)/stride), the last window clipped to the
// video end. Identical spans are merged. Returned in generation order.
inline std::vector<Candidate> propose(const std::vector<double>& scores, double fps,
                                      const GrounderConfig& cfg = {}) {
  cfg.validate();
  if (scores.empty()) throw ValidationError("empty sequence");
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  const std::size_t L = scores.size();
  const double duration = static_cast<double>(L) / fps;
  std::vector<double> prefix(L + 1, 0.0);
  for (std::size_t i = 0; i < L; ++i) prefix[i + 1] = prefix[i] + scores[i];
  auto mean_over = [&](double t0, double t1) {
    auto [a, b] = grounder_detail::frame_range(t0, t1, fps, L);
    return grounder_detail::quantize((prefix[b] - prefix[a]) / static_cast<double>(b - a));
  };

  std::vector<Candidate> out;
  std::map<std::pair<double, double>, bool> seen;
  auto emit = [&](double t0, double t1) {
    if (seen.emplace(std::make_pair(t0, t1), true).second) out.push_back({{t0, t1}, mean_over(t0, t1)});
  };
  for (double w : cfg.window_lengths) {
    if (w >= duration) {
      emit(0.0, duration);
      continue;
    }
    const auto steps = static_cast<std::size_t>(std::ceil((duration - w) / cfg.stride - 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t0 = static_cast<double>(k) * cfg.stride;
      emit(t0, std::min(t0 + w, duration));
    }
  }
  return out;
}

// Greedy suppression: keep the best remaining candidate, drop everything whose
// IoU with it exceeds the threshold. Output is in rank order.
inline std::vector<Candidate> nms(std::vector<Candidate> candidates, double iou_threshold) {
  std::sort(candidates.begin(), candidates.end(), ranks_before);
  std::vector<Candidate> kept;
  std::vector<char> dead(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (dead[i]) continue;
    kept.push_back(candidates[i]);
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      if (!dead[j] && temporal_iou(candidates[i].span, candidates[j].span) > iou_threshold) dead[j] = 1;
    }
  }
  return kept;
}

inline PredictionSet ground(const FeatureSequence& f, const QueryEmbedding& q, const GrounderConfig& cfg = {}) {
  PredictionSet p;
  p.uid = q.uid;
  const auto scores = score_frames(f, q);
  if (std::all_of(q.vector.begin(), q.vector.end(), [](float v) { return v == 0.0f; })) {
    p.diagnostics.emplace_back("degenerate query");
  }
  p.candidates = nms(propose(scores, f.fps, cfg), cfg.nms_iou);
  if (p.candidates.size() > static_cast<std::size_t>(cfg.top_k)) {
    p.candidates.resize(static_cast<std::size_t>(cfg.top_k));
  }
  return p;
}

// Grounds many queries against one read-only sequence with a small worker pool.
inline std::vector<PredictionSet> ground_all(const FeatureSequence& f, const std::vector<QueryEmbedding>& qs,
                                             const GrounderConfig& cfg = {}, unsigned workers = 1) {
  std::vector<PredictionSet> out(qs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < qs.size(); i = next++) {
      try {
        out[i] = ground(f, qs[i], cfg);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(qs.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  return out;
}

// ---- prediction file -------------------------------------------------------

inline std::size_t write_predictions(const std::vector<PredictionSet>& preds, std::ostream& sink) {
  for (const auto& p : preds) {
    auto sorted = p.candidates;
    std::stable_sort(sorted.begin(), sorted.end(), ranks_before);
    nlohmann::ordered_json j;
    j["uid"] = p.uid;
    j["spans"] = nlohmann::ordered_json::array();
    for (const auto& c : sorted) j["spans"].push_back({c.span.start, c.span.end, c.score});
    sink << j.dump() << '\n';
  }
  if (!sink) throw IoError("failed writing predictions");
  return preds.size();
}

inline std::vector<PredictionSet> read_predictions(std::istream& in) {
  std::vector<PredictionSet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = "prediction line " + std::to_string(lineno) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      PredictionSet p;
      p.uid = j.at("uid").get<std::string>();
      for (const auto& s : j.at("spans")) {
        if (!s.is_array() || s.size() != 3) throw ValidationError(where + "span must be [start,end,score]");
        Candidate c{{s[0].get<double>(), s[1].get<double>()}, s[2].get<double>()};
        if (!c.span.valid()) throw ValidationError(where + "invalid span");
        p.candidates.push_back(c);
      }
      std::stable_sort(p.candidates.begin(), p.candidates.end(), ranks_before);
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    }
  }
  return out;
}

}  // namespace vtg
