#pragma once

// Annotation adapters and the canonical line-delimited corpus format.
//
// Every adapter produces per-record rejections instead of failing on the first
// bad line; canonicalize() then applies the shared rules (duration lookup,
// clipping, degenerate-span rejection, uid dedup) so all corpora end up in one
// schema.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "vtg/canonical_form.hpp"
#include "vtg/core.hpp"
#include "vtg/error.hpp"
#include "vtg/hash.hpp"

namespace vtg {

enum class Split { Train, Val, Test };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

inline Split parse_split(std::string_view s) {
  const std::string k = detail::lower(s);
  if (k == "train") return Split::Train;
  if (k == "val" || k == "validation") return Split::Val;
  if (k == "test") return Split::Test;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

struct RawAnnotation {
  DatasetId dataset;
  std::string video_id;
  TimeSpan span;
  std::string query_text;
  Split split = Split::Train;
  std::optional<double> duration;  // known when the source format carries it
};

struct CanonicalRecord {
  std::string uid;
  DatasetId dataset;
  VideoMeta video;
  TimeSpan span;
  std::string raw_query;
  std::optional<std::string> unified_query;
  Perspective perspective = Perspective::Exo;
  Split split = Split::Train;

  friend bool operator==(const CanonicalRecord& a, const CanonicalRecord& b) {
    return a.uid == b.uid && a.dataset == b.dataset && a.video.video_id == b.video.video_id &&
           a.video.duration == b.video.duration && a.span == b.span &&
           a.raw_query == b.raw_query && a.unified_query == b.unified_query &&
           a.perspective == b.perspective && a.split == b.split;
  }
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based; 0 when the issue is not line-addressable
  std::string video_id;
  std::string reason;
};

template <class T>
struct ParseResult {
  std::vector<T> records;
  std::vector<ParseIssue> rejected;
  std::size_t dropped_empty_queries = 0;
};

// Bookkeeping for one ingest run: parsed == accepted + rejected.
struct IngestReport {
  std::size_t parsed = 0;
  std::size_t accepted = 0;
  std::size_t clipped = 0;
  std::map<std::string, std::size_t> rejected_by_reason;
  std::vector<ParseIssue> issues;

  std::size_t rejected() const {
    std::size_t n = 0;
    for (const auto& [reason, count] : rejected_by_reason) n += count;
    return n;
  }

  void reject(ParseIssue issue) {
    ++parsed;
    ++rejected_by_reason[issue.reason];
    issues.push_back(std::move(issue));
  }

  // Adapter-level rejections (malformed lines, arity mismatches) count as parsed inputs.
  void absorb(const std::vector<ParseIssue>& adapter_issues) {
    for (const auto& i : adapter_issues) reject(i);
  }
};

inline double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

// uid = FNV-1a over (dataset, video_id, start_ms, end_ms, raw_query).
inline std::string make_uid(const DatasetId& dataset, std::string_view video_id,
                            const TimeSpan& span, std::string_view raw_query) {
  const auto ms = [](double s) { return std::to_string(std::llround(s * 1000.0)); };
  return Fnv1a64{}
      .field(dataset.slug())
      .field(video_id)
      .field(ms(span.start))
      .field(ms(span.end))
      .field(raw_query)
      .hex();
}

// Builds a record with ms-quantized times and a fresh uid. Does not clip.
inline CanonicalRecord make_record(const DatasetId& dataset, std::string video_id,
                                   double duration, TimeSpan span, std::string raw_query,
                                   Split split = Split::Train,
                                   std::optional<std::string> unified = std::nullopt) {
  CanonicalRecord r;
  r.dataset = dataset;
  r.video = VideoMeta{std::move(video_id), round_ms(duration), dataset};
  r.span = {round_ms(span.start), round_ms(span.end)};
  r.raw_query = std::move(raw_query);
  r.unified_query = std::move(unified);
  r.perspective = dataset.perspective();
  r.split = split;
  r.uid = make_uid(dataset, r.video.video_id, r.span, r.raw_query);
  return r;
}

using DurationIndex = std::unordered_map<std::string, double>;

namespace ingest_detail {

inline std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<double> json_number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_number(j.get<std::string>());
  return std::nullopt;
}

// Reason string for an out-of-order or negative span, or empty when fine.
inline std::string span_problem(double start, double end) {
  if (start < 0.0 || end < 0.0) return "negative time";
  if (start > end) return "start>end";
  return {};
}

inline nlohmann::json read_json(std::istream& in, const char* what) {
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("invalid ") + what + " document: " + e.what());
  }
}

}  // namespace ingest_detail

// Line grammar: `VIDEO_ID START END##sentence`.
inline ParseResult<RawAnnotation> parse_charades_sta(std::istream& lines,
                                                      Split split = Split::Train,
                                                      DatasetId dataset = DatasetId::Kind::CharadesSta) {
  ParseResult<RawAnnotation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto sep = line.find("##");
    if (sep == std::string::npos) {
      out.rejected.push_back({lineno, {}, "missing '##' separator"});
      continue;
    }
    const auto head = text::split_words(line.substr(0, sep));
    const std::string query = text::trim(line.substr(sep + 2));
    if (head.size() != 3) {
      out.rejected.push_back({lineno, head.empty() ? "" : head[0], "expected VIDEO_ID START END"});
      continue;
    }
    const auto start = ingest_detail::parse_number(head[1]);
    const auto end = ingest_detail::parse_number(head[2]);
    if (!start || !end) {
      out.rejected.push_back({lineno, head[0], "bad number"});
      continue;
    }
    if (auto p = ingest_detail::span_problem(*start, *end); !p.empty()) {
      out.rejected.push_back({lineno, head[0], p});
      continue;
    }
    if (query.empty()) {
      out.rejected.push_back({lineno, head[0], "empty query"});
      continue;
    }
    out.records.push_back({dataset, head[0], {*start, *end}, query, split, std::nullopt});
  }
  if (out.records.empty()) {
    throw ValidationError("no parsable annotation lines (" + std::to_string(out.rejected.size()) +
                          " rejected)");
  }
  return out;
}

// Key names for the dense-caption map adapter (ActivityNet-Captions, TACoS).
struct DenseCaptionFields {
  std::string timestamps = "timestamps";
  std::string sentences = "sentences";
  std::string duration = "duration";
  std::string fps = "fps";
  std::string num_frames = "num_frames";
};

// When a video carries `fps`, its timestamps are frame indices and are divided by fps.
inline ParseResult<RawAnnotation> parse_dense_caption_json(const nlohmann::json& doc,
                                                            const DatasetId& dataset,
                                                            Split split = Split::Train,
                                                            const DenseCaptionFields& f = {}) {
  if (!doc.is_object()) throw ValidationError("dense-caption document must be a JSON object");
  ParseResult<RawAnnotation> out;
  for (const auto& [video_id, v] : doc.items()) {
    if (!v.is_object()) {
      out.rejected.push_back({0, video_id, "video entry is not an object"});
      continue;
    }
    const auto ts = v.find(f.timestamps);
    const auto ss = v.find(f.sentences);
    if (ts == v.end() || ss == v.end() || !ts->is_array() || !ss->is_array()) {
      out.rejected.push_back({0, video_id, "missing timestamps or sentences"});
      continue;
    }
    if (ts->size() != ss->size()) {
      out.rejected.push_back({0, video_id, "parallel array mismatch"});
      continue;
    }
    std::optional<double> fps;
    if (auto it = v.find(f.fps); it != v.end()) fps = ingest_detail::json_number(*it);
    std::optional<double> duration;
    if (auto it = v.find(f.duration); it != v.end()) duration = ingest_detail::json_number(*it);
    if (!duration && fps) {
      if (auto it = v.find(f.num_frames); it != v.end()) {
        if (auto n = ingest_detail::json_number(*it)) duration = *n / *fps;
      }
    }
    if (fps && *fps <= 0.0) {
      out.rejected.push_back({0, video_id, "non-positive fps"});
      continue;
    }
    if (!duration) {
      out.rejected.push_back({0, video_id, "missing duration and fps"});
      continue;
    }
    const double scale = fps ? 1.0 / *fps : 1.0;
    for (std::size_t i = 0; i < ts->size(); ++i) {
      const auto& pair = (*ts)[i];
      std::optional<double> a, b;
      if (pair.is_array() && pair.size() == 2) {
        a = ingest_detail::json_number(pair[0]);
        b = ingest_detail::json_number(pair[1]);
      }
      if (!a || !b) {
        out.rejected.push_back({0, video_id, "malformed timestamp"});
        continue;
      }
      const double start = *a * scale, end = *b * scale;
      if (auto p = ingest_detail::span_problem(start, end); !p.empty()) {
        out.rejected.push_back({0, video_id, p});
        continue;
      }
      const std::string query =
          (*ss)[i].is_string() ? text::trim((*ss)[i].get<std::string>()) : std::string();
      if (query.empty()) {
        ++out.dropped_empty_queries;
        continue;
      }
      out.records.push_back({dataset, video_id, {start, end}, query, split, duration});
    }
  }
  return out;
}

inline ParseResult<RawAnnotation> parse_dense_caption_json(std::istream& in,
                                                            const DatasetId& dataset,
                                                            Split split = Split::Train,
                                                            const DenseCaptionFields& f = {}) {
  return parse_dense_caption_json(ingest_detail::read_json(in, "dense-caption"), dataset, split, f);
}

// Key names for the nested videos -> clips -> annotations -> queries adapter.
struct NlqFields {
  std::string videos = "videos";
  std::string clips = "clips";
  std::string clip_id = "clip_uid";
  std::string clip_start = "video_start_sec";
  std::string clip_end = "video_end_sec";
  std::string clip_duration = "clip_duration";
  std::string annotations = "annotations";  // empty: queries sit directly under the clip
  std::string queries = "language_queries";
  std::string query = "query";
  std::string start = "clip_start_sec";
  std::string end = "clip_end_sec";
};

// Spans are clip-relative; each clip is treated as the video being grounded.
inline ParseResult<RawAnnotation> parse_nlq_json(const nlohmann::json& doc,
                                                  Split split = Split::Train,
                                                  const NlqFields& f = {},
                                                  DatasetId dataset = DatasetId::Kind::Ego4dNlq) {
  const auto require_array = [](const nlohmann::json& parent, const std::string& key,
                                const char* where) -> const nlohmann::json& {
    auto it = parent.find(key);
    if (it == parent.end() || !it->is_array()) {
      throw ValidationError(std::string("NLQ structure: missing array '") + key + "' in " + where);
    }
    return *it;
  };
  if (!doc.is_object()) throw ValidationError("NLQ document must be a JSON object");
  ParseResult<RawAnnotation> out;
  for (const auto& video : require_array(doc, f.videos, "document")) {
    for (const auto& clip : require_array(video, f.clips, "video")) {
      auto id = clip.find(f.clip_id);
      if (id == clip.end() || !id->is_string()) {
        throw ValidationError("NLQ structure: clip without '" + f.clip_id + "'");
      }
      const std::string clip_id = id->get<std::string>();
      std::optional<double> duration;
      if (auto it = clip.find(f.clip_duration); it != clip.end()) {
        duration = ingest_detail::json_number(*it);
      }
      if (!duration) {
        auto a = clip.find(f.clip_start), b = clip.find(f.clip_end);
        if (a != clip.end() && b != clip.end()) {
          auto sa = ingest_detail::json_number(*a), sb = ingest_detail::json_number(*b);
          if (sa && sb) duration = *sb - *sa;
        }
      }
      std::vector<const nlohmann::json*> query_lists;
      if (f.annotations.empty()) {
        query_lists.push_back(&require_array(clip, f.queries, "clip"));
      } else if (auto ann = clip.find(f.annotations); ann != clip.end() && ann->is_array()) {
        for (const auto& a : *ann) query_lists.push_back(&require_array(a, f.queries, "annotation"));
      }
      for (const auto* list : query_lists) {
        for (const auto& q : *list) {
          auto qt = q.find(f.query);
          auto qs = q.find(f.start);
          auto qe = q.find(f.end);
          if (qt == q.end() || !qt->is_string()) {
            out.rejected.push_back({0, clip_id, "missing field " + f.query});
            continue;
          }
          const std::string text_ = text::trim(qt->get<std::string>());
          if (text_.empty()) {
            ++out.dropped_empty_queries;
            continue;
          }
          if (qs == q.end() || qe == q.end()) {
            out.rejected.push_back(
                {0, clip_id, "missing field " + (qs == q.end() ? f.start : f.end)});
            continue;
          }
          auto s = ingest_detail::json_number(*qs), e = ingest_detail::json_number(*qe);
          if (!s || !e) {
            out.rejected.push_back({0, clip_id, "bad number"});
            continue;
          }
          if (auto p = ingest_detail::span_problem(*s, *e); !p.empty()) {
            out.rejected.push_back({0, clip_id, p});
            continue;
          }
          out.records.push_back({dataset, clip_id, {*s, *e}, text_, split, duration});
        }
      }
    }
  }
  return out;
}

inline ParseResult<RawAnnotation> parse_nlq_json(std::istream& in, Split split = Split::Train,
                                                  const NlqFields& f = {},
                                                  DatasetId dataset = DatasetId::Kind::Ego4dNlq) {
  return parse_nlq_json(ingest_detail::read_json(in, "NLQ"), split, f, dataset);
}

struct AdapterFieldMaps {
  NlqFields nlq;
  DenseCaptionFields dense_caption;
};

// Overrides: {"nlq": {"clip_id": "clip_uid", ...}, "dense_caption": {"fps": "fps", ...}}.
inline AdapterFieldMaps parse_field_maps(const nlohmann::json& cfg) {
  AdapterFieldMaps m;
  const auto set = [](const nlohmann::json& obj, const char* key, std::string& target) {
    if (auto it = obj.find(key); it != obj.end()) {
      if (!it->is_string()) throw ValidationError(std::string("field map '") + key + "' must be a string");
      target = it->get<std::string>();
    }
  };
  if (auto n = cfg.find("nlq"); n != cfg.end()) {
    set(*n, "videos", m.nlq.videos);
    set(*n, "clips", m.nlq.clips);
    set(*n, "clip_id", m.nlq.clip_id);
    set(*n, "clip_start", m.nlq.clip_start);
    set(*n, "clip_end", m.nlq.clip_end);
    set(*n, "clip_duration", m.nlq.clip_duration);
    set(*n, "annotations", m.nlq.annotations);
    set(*n, "queries", m.nlq.queries);
    set(*n, "query", m.nlq.query);
    set(*n, "start", m.nlq.start);
    set(*n, "end", m.nlq.end);
  }
  if (auto d = cfg.find("dense_caption"); d != cfg.end()) {
    set(*d, "timestamps", m.dense_caption.timestamps);
    set(*d, "sentences", m.dense_caption.sentences);
    set(*d, "duration", m.dense_caption.duration);
    set(*d, "fps", m.dense_caption.fps);
    set(*d, "num_frames", m.dense_caption.num_frames);
  }
  return m;
}

// Sidecar lines: {"video_id": "...", "duration": seconds}.
inline DurationIndex load_duration_index(std::istream& in) {
  DurationIndex index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto d = ingest_detail::json_number(j.at("duration"));
      if (!d || *d <= 0.0) throw ValidationError("bad duration");
      index[j.at("video_id").get<std::string>()] = *d;
    } catch (const std::exception& e) {
      throw ValidationError("duration index line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return index;
}

// Applies the shared acceptance rules to adapter output.
inline std::vector<CanonicalRecord> canonicalize(const std::vector<RawAnnotation>& raws,
                                                 const DurationIndex& durations,
                                                 IngestReport& report) {
  std::vector<CanonicalRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& raw : raws) {
    ParseIssue issue{0, raw.video_id, {}};
    std::optional<double> duration = raw.duration;
    if (!duration) {
      if (auto it = durations.find(raw.video_id); it != durations.end()) duration = it->second;
    }
    const std::string query = text::trim(raw.query_text);
    if (!duration || !(*duration > 0.0)) {
      issue.reason = "missing duration";
    } else if (query.empty()) {
      issue.reason = "empty query";
    } else if (!raw.span.valid()) {
      issue.reason = "invalid span";
    } else if (raw.span.degenerate()) {
      issue.reason = "degenerate span";
    } else if (raw.span.start >= *duration) {
      issue.reason = "span fully outside video";
    }
    if (!issue.reason.empty()) {
      report.reject(std::move(issue));
      continue;
    }
    const VideoMeta meta{raw.video_id, *duration, raw.dataset};
    const TimeSpan clipped = clip_to_video(raw.span, meta);
    CanonicalRecord rec = make_record(raw.dataset, raw.video_id, *duration, clipped, query, raw.split);
    if (rec.span.degenerate()) {
      report.reject({0, raw.video_id, "degenerate span"});
      continue;
    }
    if (!seen.insert(rec.uid).second) {
      report.reject({0, raw.video_id, "duplicate uid"});
      continue;
    }
    if (!(clipped == raw.span)) ++report.clipped;
    ++report.parsed;
    ++report.accepted;
    out.push_back(std::move(rec));
  }
  return out;
}

// Reads the canonical format (also accepts `query` in place of `raw_query` and omitted
// uid/perspective/unified_query). Duplicate uids keep the first occurrence.
inline ParseResult<CanonicalRecord> parse_generic_jsonl(std::istream& lines,
                                                         IngestReport* report = nullptr) {
  ParseResult<CanonicalRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  std::size_t clipped = 0;
  auto reject = [&](std::string reason, std::string video = {}) {
    out.rejected.push_back({lineno, std::move(video), std::move(reason)});
  };
  while (std::getline(lines, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      reject("invalid JSON");
      continue;
    }
    if (!j.is_object()) {
      reject("record is not an object");
      continue;
    }
    const char* query_key = j.contains("raw_query") ? "raw_query" : "query";
    std::string missing;
    for (const char* k : {"dataset", "video_id", "duration", "start", "end", query_key, "split"}) {
      if (!j.contains(k) || j[k].is_null()) {
        missing = k;
        break;
      }
    }
    if (!missing.empty()) {
      reject("missing field " + (missing == "raw_query" ? std::string("query") : missing));
      continue;
    }
    try {
      const auto dataset = DatasetId::parse(j["dataset"].get<std::string>());
      const std::string video_id = j["video_id"].get<std::string>();
      const auto duration = ingest_detail::json_number(j["duration"]);
      const auto start = ingest_detail::json_number(j["start"]);
      const auto end = ingest_detail::json_number(j["end"]);
      if (video_id.empty()) throw ValidationError("empty video_id");
      if (!duration || !start || !end) throw ValidationError("bad number");
      if (!(*duration > 0.0)) throw ValidationError("non-positive duration");
      if (auto p = ingest_detail::span_problem(*start, *end); !p.empty()) throw ValidationError(p);
      if (*start == *end) throw ValidationError("degenerate span");
      if (*start >= *duration) throw ValidationError("span fully outside video");
      const std::string query = text::trim(j[query_key].get<std::string>());
      if (query.empty()) throw ValidationError("empty query");
      std::optional<std::string> unified;
      if (auto u = j.find("unified_query"); u != j.end() && !u->is_null()) {
        unified = u->get<std::string>();
        if (!validate_canonical(*unified).ok) throw ValidationError("invalid unified_query");
      }
      const VideoMeta meta{video_id, *duration, dataset};
      const TimeSpan raw_span{*start, *end};
      const TimeSpan span = clip_to_video(raw_span, meta);
      auto rec = make_record(dataset, video_id, *duration, span, query,
                             parse_split(j["split"].get<std::string>()), std::move(unified));
      if (rec.span.degenerate()) throw ValidationError("degenerate span");
      if (auto p = j.find("perspective"); p != j.end() && !p->is_null() &&
                                          p->get<std::string>() != perspective_name(rec.perspective)) {
        throw ValidationError("perspective mismatch");
      }
      // A stored uid is only checked when the span needed no clipping.
      if (auto u = j.find("uid"); u != j.end() && !u->is_null() && span == raw_span &&
                                  u->get<std::string>() != rec.uid) {
        throw ValidationError("uid mismatch");
      }
      if (!seen.insert(rec.uid).second) {
        reject("duplicate uid", video_id);
        continue;
      }
      if (!(span == raw_span)) ++clipped;
      out.records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      reject(std::string("schema error: ") + e.what());
    } catch (const ValidationError& e) {
      reject(e.what());
    }
  }
  if (report != nullptr) {
    report->absorb(out.rejected);
    report->parsed += out.records.size();
    report->accepted += out.records.size();
    report->clipped += clipped;
  }
  return out;
}

struct WriteSummary {
  std::size_t written = 0;
  std::size_t duplicates = 0;
};

inline nlohmann::ordered_json to_json(const CanonicalRecord& r) {
  nlohmann::ordered_json j;
  j["uid"] = r.uid;
  j["dataset"] = r.dataset.slug();
  j["video_id"] = r.video.video_id;
  j["duration"] = round_ms(r.video.duration);
  j["start"] = round_ms(r.span.start);
  j["end"] = round_ms(r.span.end);
  j["raw_query"] = r.raw_query;
  j["unified_query"] = r.unified_query ? nlohmann::ordered_json(*r.unified_query)
                                       : nlohmann::ordered_json(nullptr);
  j["perspective"] = perspective_name(r.perspective);
  j["split"] = split_name(r.split);
  return j;
}

// One record per line, fixed field order. Later records repeating a uid are skipped.
inline WriteSummary write_canonical(const std::vector<CanonicalRecord>& records, std::ostream& sink) {
  WriteSummary s;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.uid).second) {
      ++s.duplicates;
      continue;
    }
    sink << to_json(r).dump() << '\n';
    ++s.written;
  }
  if (!sink) throw IoError("failed writing canonical corpus");
  return s;
}

inline std::vector<CanonicalRecord> read_canonical_file(const std::string& path,
                                                        IngestReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path + "'");
  return parse_generic_jsonl(in, report).records;
}

struct DatasetStats {
  std::size_t videos = 0;
  std::size_t queries = 0;
  double mean_video_seconds = 0.0;
  double mean_segment_seconds = 0.0;
};

struct CorpusStats {
  std::map<DatasetId, DatasetStats> per_dataset;
  std::size_t parsed = 0;
  std::size_t accepted = 0;
  std::size_t clipped = 0;
  std::map<std::string, std::size_t> rejected_by_reason;
};

// Video count is distinct video_ids; mean video length is over distinct videos.
inline CorpusStats corpus_stats(const std::vector<CanonicalRecord>& records,
                                const IngestReport* report = nullptr) {
  CorpusStats stats;
  std::map<DatasetId, std::map<std::string, double>> videos;
  std::map<DatasetId, double> seg_sum;
  for (const auto& r : records) {
    auto& d = stats.per_dataset[r.dataset];
    ++d.queries;
    seg_sum[r.dataset] += span_length(r.span);
    videos[r.dataset].emplace(r.video.video_id, r.video.duration);
  }
  for (auto& [id, d] : stats.per_dataset) {
    const auto& vids = videos[id];
    d.videos = vids.size();
    double total = 0.0;
    for (const auto& [vid, dur] : vids) total += dur;
    d.mean_video_seconds = vids.empty() ? 0.0 : total / static_cast<double>(vids.size());
    d.mean_segment_seconds = seg_sum[id] / static_cast<double>(d.queries);
  }
  if (report != nullptr) {
    stats.parsed = report->parsed;
    stats.accepted = report->accepted;
    stats.clipped = report->clipped;
    stats.rejected_by_reason = report->rejected_by_reason;
  } else {
    stats.parsed = stats.accepted = records.size();
  }
  return stats;
}

}  // namespace vtg
