#pragma once

// Command-line front end. `run` is the whole program minus process setup so it
// can be driven from tests with string streams.
//
// Exit status: 0 success, 1 invalid input or arguments, 2 I/O or transport failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vtg/corpus.hpp"
#include "vtg/cost.hpp"
#include "vtg/eval.hpp"
#include "vtg/grounder.hpp"
#include "vtg/ingest.hpp"
#include "vtg/unify.hpp"
#include "vtg/unify_http.hpp"

namespace vtg::cli {

inline constexpr const char* kProgram = "vtgkit";

namespace io {

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

// Writes to a file, or to `fallback` when the path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*file_) throw IoError("cannot create '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }
  void close(const std::string& path) {
    stream_->flush();
    if (!*stream_) throw IoError("failed writing '" + (path.empty() ? std::string("<stdout>") : path) + "'");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

inline std::vector<CanonicalRecord> read_corpus(const std::string& path, std::ostream& err) {
  auto in = open_in(path);
  IngestReport report;
  auto recs = parse_generic_jsonl(in, &report).records;
  if (report.rejected() > 0) {
    err << "warning: " << path << ": skipped " << report.rejected() << " invalid record(s)\n";
  }
  return recs;
}

inline std::string fmt_num(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace io

struct Options {
  int verbosity = 0;

  struct {
    std::string dataset, annotations, duration_index, field_map, out, report;
    std::string format = "auto";
    std::string split = "train";
  } ingest;

  struct {
    std::string in, out, report, endpoint, model, prompt_file;
    std::string backend = "rules";
    std::string api_key_env = "VTG_UNIFIER_API_KEY";
    std::string cache_dir = ".vtg-unify-cache";
    int max_concurrent = 4;
    int max_retries = 3;
    double timeout = 60.0;
    double max_failure_fraction = 0.10;
  } unify;

  struct {
    std::string corpus, plan, out;
    std::string stage = "I";
    std::uint64_t seed = 0;
    int iterations = 0;
    unsigned workers = 1;
  } sample;

  struct {
    std::string features, queries, index, corpus, out;
    std::vector<double> windows{5.0, 10.0, 20.0, 40.0};
    double stride = 2.5;
    double nms_iou = 0.5;
    int top_k = 5;
    unsigned workers = 1;
  } ground;

  struct {
    std::string preds, gt, out;
    std::string convention = "auto";
    std::string format = "aligned-text";
  } eval;

  struct {
    std::string cells, out;
    std::string format = "aligned-text";
  } matrix;

  struct {
    std::string method = "all";
    std::string backbone, registry;
    std::string format = "aligned-text";
    double seconds = 0.0;
    double coefficient = 0.0;
    bool vit_check = false;
  } cost;

  struct {
    std::vector<std::string> corpus;
    std::string format = "aligned-text";
  } stats;
};

// ---- subcommand bodies -----------------------------------------------------

inline int do_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  const auto& a = o.ingest;
  const DatasetId dataset = DatasetId::parse(a.dataset);
  const Split split = parse_split(a.split);
  std::string format = a.format;
  if (format == "auto") {
    switch (dataset.kind()) {
      case DatasetId::Kind::CharadesSta: format = "charades"; break;
      case DatasetId::Kind::ActivityNetCaptions:
      case DatasetId::Kind::Tacos: format = "dense-caption"; break;
      case DatasetId::Kind::Ego4dNlq:
      case DatasetId::Kind::GoalStep: format = "nlq"; break;
      default: format = "jsonl";
    }
  }
  DurationIndex durations;
  if (!a.duration_index.empty()) {
    auto in = io::open_in(a.duration_index);
    durations = load_duration_index(in);
  } else if (format == "charades") {
    throw ValidationError("charades annotations carry no durations; pass --duration-index");
  }
  AdapterFieldMaps maps;
  if (!a.field_map.empty()) {
    auto in = io::open_in(a.field_map);
    maps = parse_field_maps(ingest_detail::read_json(in, "field map"));
  }

  auto in = io::open_in(a.annotations);
  IngestReport report;
  std::vector<CanonicalRecord> records;
  if (format == "jsonl") {
    records = parse_generic_jsonl(in, &report).records;
  } else {
    ParseResult<RawAnnotation> raw;
    if (format == "charades") {
      raw = parse_charades_sta(in, split, dataset);
    } else if (format == "dense-caption") {
      raw = parse_dense_caption_json(in, dataset, split, maps.dense_caption);
    } else if (format == "nlq") {
      raw = parse_nlq_json(in, split, maps.nlq, dataset);
    } else {
      throw ValidationError("unknown annotation format '" + format + "'");
    }
    report.absorb(raw.rejected);
    records = canonicalize(raw.records, durations, report);
    if (raw.dropped_empty_queries && o.verbosity > 0) {
      err << "dropped " << raw.dropped_empty_queries << " empty quer"
          << (raw.dropped_empty_queries == 1 ? "y" : "ies") << "\n";
    }
  }

  io::Sink sink(a.out, out);
  const auto summary = write_canonical(records, sink.get());
  sink.close(a.out);

  err << "ingest " << dataset.slug() << ": parsed " << report.parsed << ", accepted " << report.accepted
      << ", clipped " << report.clipped << ", rejected " << report.rejected() << "\n";
  for (const auto& [reason, n] : report.rejected_by_reason) err << "  " << reason << ": " << n << "\n";
  if (o.verbosity > 1) {
    for (const auto& i : report.issues) {
      err << "  line " << i.line << " video " << i.video_id << ": " << i.reason << "\n";
    }
  }
  if (!a.report.empty()) {
    nlohmann::ordered_json j;
    j["dataset"] = dataset.slug();
    j["parsed"] = report.parsed;
    j["accepted"] = report.accepted;
    j["written"] = summary.written;
    j["clipped"] = report.clipped;
    j["rejected"] = report.rejected();
    j["rejected_by_reason"] = report.rejected_by_reason;
    io::Sink rs(a.report, out);
    rs.get() << j.dump(2) << "\n";
    rs.close(a.report);
  }
  return 0;
}

inline int do_unify(const Options& o, std::ostream& out, std::ostream& err) {
  const auto& a = o.unify;
  auto records = io::read_corpus(a.in, err);
  UnifierBackend backend;
  UnifyCorpusOptions opts;
  opts.max_failure_fraction = a.max_failure_fraction;
  std::optional<UnifyCorpusResult> result;
  if (a.backend == "rules") {
    result = unify_corpus(std::move(records), backend, nullptr, nullptr, opts);
  } else if (a.backend == "llm") {
    if (a.endpoint.empty() || a.model.empty()) throw ValidationError("--backend llm needs --endpoint and --model");
    backend = UnifierBackend::llm(a.endpoint, a.model);
    if (!a.prompt_file.empty()) {
      auto in = io::open_in(a.prompt_file);
      std::stringstream ss;
      ss << in.rdbuf();
      backend.system_prompt = ss.str();
    }
    backend.api_key_env = a.api_key_env;
    backend.max_concurrent = a.max_concurrent;
    backend.max_retries = a.max_retries;
    backend.timeout_seconds = a.timeout;
    if (auto c = find_unifier_compute(a.model)) opts.tflops_per_query = c->tflops_per_query;
    UnifyCache cache = a.cache_dir.empty() ? UnifyCache() : UnifyCache(a.cache_dir);
    auto client = HttpChatClient::from_env(a.endpoint, a.api_key_env);
    result = unify_corpus(std::move(records), backend, &cache, &client, opts);
  } else {
    throw ValidationError("unknown backend '" + a.backend + "' (rules or llm)");
  }

  io::Sink sink(a.out, out);
  write_canonical(result->records, sink.get());
  sink.close(a.out);

  const auto& rep = result->report;
  err << "unify " << rep.backend << ": " << rep.queries << " queries, " << rep.network_calls
      << " network calls, " << rep.cache_hits << " cache hits, " << rep.downgrades << " downgrades";
  if (rep.estimated_tflops) err << ", " << io::fmt_num(*rep.estimated_tflops) << " TFLOPs";
  err << "\n";
  if (!a.report.empty()) {
    io::Sink rs(a.report, out);
    rs.get() << to_json(rep).dump(2) << "\n";
    rs.close(a.report);
  }
  return 0;
}

inline int do_sample(const Options& o, std::ostream& out, std::ostream& err) {
  const auto& a = o.sample;
  SamplingPlan plan;
  if (!a.plan.empty()) {
    auto in = io::open_in(a.plan);
    plan = parse_sampling_plan(ingest_detail::read_json(in, "sampling plan"));
  } else {
    nlohmann::json j;
    j["stage"] = a.stage;
    plan = parse_sampling_plan(j);
  }
  plan.seed = a.seed;
  if (a.iterations > 0) plan.iterations_per_epoch = a.iterations;
  const auto corpus = io::read_corpus(a.corpus, err);
  const auto batches = build_epoch(plan, corpus, std::nullopt, a.workers);
  io::Sink sink(a.out, out);
  const auto n = export_batches(batches, sink.get());
  sink.close(a.out);
  err << "sample: " << plan.iterations_per_epoch << " iterations x " << plan.replicas << " replicas, "
      << plan.batch_size() << " samples per batch, " << n << " batches written\n";
  return 0;
}

inline int do_ground(const Options& o, std::ostream& out, std::ostream& err) {
  const auto& a = o.ground;
  GrounderConfig cfg;
  cfg.window_lengths = a.windows;
  cfg.stride = a.stride;
  cfg.nms_iou = a.nms_iou;
  cfg.top_k = a.top_k;
  cfg.validate();

  auto qm = io::open_in(a.queries, std::ios::binary);
  auto qi = io::open_in(a.index);
  std::vector<QueryIndexEntry> entries;
  const auto queries = read_queries(qm, qi, &entries);

  std::unordered_map<std::string, std::string> video_of;
  if (!a.corpus.empty()) {
    for (const auto& r : io::read_corpus(a.corpus, err)) video_of.emplace(r.uid, r.video.video_id);
  }
  // Group query rows by video so each feature file is read once.
  std::map<std::string, std::vector<std::size_t>> rows_by_video;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::string vid = entries[i].video_id;
    if (vid.empty()) {
      auto it = video_of.find(entries[i].uid);
      if (it == video_of.end()) {
        throw ValidationError("no video for query '" + entries[i].uid + "' (add video_id to the index or pass --corpus)");
      }
      vid = it->second;
    }
    rows_by_video[vid].push_back(i);
  }
  std::vector<PredictionSet> preds(queries.size());
  for (const auto& [vid, rows] : rows_by_video) {
    const auto features = read_features(std::filesystem::path(a.features) / (vid + ".vtgf"));
    std::vector<QueryEmbedding> batch;
    for (auto r : rows) batch.push_back(queries[r]);
    auto got = ground_all(features, batch, cfg, a.workers);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (const auto& d : got[k].diagnostics) err << "query " << got[k].uid << ": " << d << "\n";
      preds[rows[k]] = std::move(got[k]);
    }
  }
  io::Sink sink(a.out, out);
  const auto n = write_predictions(preds, sink.get());
  sink.close(a.out);
  err << "ground: " << n << " queries over " << rows_by_video.size() << " videos\n";
  return 0;
}

inline int do_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const auto& a = o.eval;
  const RenderFormat fmt = parse_render_format(a.format);
  std::optional<BenchmarkConvention> forced;
  if (a.convention == "long") {
    forced = BenchmarkConvention::long_form();
  } else if (a.convention == "short") {
    forced = BenchmarkConvention::short_form();
  } else if (a.convention != "auto") {
    throw ValidationError("unknown convention '" + a.convention + "' (auto, long, short)");
  }
  auto pin = io::open_in(a.preds);
  const auto preds = read_predictions(pin);
  const auto gt_records = io::read_corpus(a.gt, err);

  std::map<DatasetId, GroundTruth> gts;
  std::unordered_map<std::string, DatasetId> dataset_of;
  for (const auto& r : gt_records) {
    gts[r.dataset].emplace(r.uid, r.span);
    dataset_of.emplace(r.uid, r.dataset);
  }
  std::map<DatasetId, std::vector<PredictionSet>> preds_by;
  std::size_t unmatched = 0;
  for (const auto& p : preds) {
    auto it = dataset_of.find(p.uid);
    if (it == dataset_of.end()) {
      ++unmatched;
      if (o.verbosity > 0) err << "no ground truth for prediction '" << p.uid << "'\n";
      continue;
    }
    preds_by[it->second].push_back(p);
  }
  if (gts.empty()) throw ValidationError("empty evaluation");
  std::vector<RecallReport> reports;
  for (const auto& [ds, g] : gts) {
    reports.push_back(recall_table(preds_by[ds], g, forced.value_or(ds.convention()), ds));
    if (reports.back().missing_predictions > 0) {
      err << ds.display_name() << ": " << reports.back().missing_predictions
          << " ground truth(s) without predictions counted as misses\n";
    }
  }
  if (unmatched > 0) err << "warning: " << unmatched << " prediction(s) without ground truth ignored\n";
  io::Sink sink(a.out, out);
  sink.get() << render_report(reports, fmt);
  sink.close(a.out);
  return 0;
}

// Cells file: CSV lines "train,test,value" (an optional header line is skipped)
// or JSON {"cells": [{"train": ..., "test": ..., "value": ...}]}.
inline CrossMatrix read_cells(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string body = ss.str();
  std::map<CrossKey, double> values;
  std::vector<DatasetId> rows, cols;
  auto add = [&](const std::string& tr, const std::string& te, double v) {
    const DatasetId r = DatasetId::parse(text::trim(tr));
    const DatasetId c = DatasetId::parse(text::trim(te));
    if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(r);
    if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    values[{r, c}] = v;
  };
  const std::string trimmed = text::trim(body);
  if (!trimmed.empty() && trimmed.front() == '{') {
    try {
      for (const auto& c : nlohmann::json::parse(trimmed).at("cells")) {
        add(c.at("train").get<std::string>(), c.at("test").get<std::string>(), c.at("value").get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad cells file: ") + e.what());
    }
  } else {
    std::istringstream lines(body);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (text::trim(line).empty() || text::trim(line).front() == '#') continue;
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string part; std::getline(ls, part, ',');) f.push_back(part);
      if (f.size() != 3) throw ValidationError("cells line " + std::to_string(lineno) + ": expected train,test,value");
      const auto v = ingest_detail::parse_number(text::trim(f[2]));
      if (!v) {
        if (lineno == 1) continue;  // header
        throw ValidationError("cells line " + std::to_string(lineno) + ": bad value '" + f[2] + "'");
      }
      add(f[0], f[1], *v);
    }
  }
  return cross_matrix(values, rows, cols);
}

inline int do_matrix(const Options& o, std::ostream& out, std::ostream&) {
  const auto& a = o.matrix;
  const RenderFormat fmt = parse_render_format(a.format);
  auto in = io::open_in(a.cells);
  const auto m = read_cells(in);
  io::Sink sink(a.out, out);
  sink.get() << render_matrix(m, fmt);
  sink.close(a.out);
  return 0;
}

inline int do_cost(const Options& o, std::ostream& out, std::ostream&) {
  const auto& a = o.cost;
  const RenderFormat fmt = parse_render_format(a.format);
  if (!(a.seconds >= 0.0)) throw ValidationError("--seconds must be non-negative");
  BackboneRegistry registry;
  if (!a.registry.empty()) {
    auto in = io::open_in(a.registry);
    registry = BackboneRegistry::load(in);
  }
  std::vector<MethodSpec> methods;
  if (a.method == "all") {
    methods = default_methods();
  } else {
    methods.push_back(find_method(a.method));
  }
  for (auto& m : methods) {
    if (!m.modeled()) continue;
    if (!a.backbone.empty()) {
      m.backbone = registry.find(a.backbone);
      m.name += " (" + m.backbone->name + ")";
      m.registered.clear();  // runtimes were measured with the default backbone
    } else if (!a.registry.empty()) {
      m.backbone = registry.find(m.backbone->name);
    }
    if (a.coefficient > 0.0) {
      m.grounding = LinearGroundingModel{a.coefficient * 500.0, 500.0};
      m.registered.clear();
    }
  }
  const auto rows = compare_methods(methods, a.seconds);
  out << render_costs(rows, fmt);
  if (a.vit_check) {
    const auto shape = VitShape::vit_l14_336();
    const double est = vit_tflops_per_min(shape, 2.0, OpConvention::Macs);
    const double reg = registry.find("CLIP-ViT-L14").tflops_per_min;
    out << "ViT-L/14-336 analytic estimate at 2 frames/s (MACs): " << io::fmt_num(est, "%.2f")
        << " TFLOPs/min; registered " << io::fmt_num(reg, "%.2f") << " (ratio "
        << io::fmt_num(est / reg, "%.3f") << ")\n";
  }
  return 0;
}

inline int do_stats(const Options& o, std::ostream& out, std::ostream& err) {
  const RenderFormat fmt = parse_render_format(o.stats.format);
  std::vector<std::vector<CanonicalRecord>> parts;
  for (const auto& p : o.stats.corpus) parts.push_back(io::read_corpus(p, err));
  const auto merged = merge_corpora(parts);
  const auto stats = corpus_stats(merged);
  std::vector<std::vector<std::string>> rows;
  std::size_t q = 0, v = 0;
  for (const auto& [ds, d] : stats.per_dataset) {
    rows.push_back({ds.display_name(), std::to_string(d.queries), std::to_string(d.videos),
                    io::fmt_num(d.mean_video_seconds, "%.2f"), io::fmt_num(d.mean_segment_seconds, "%.2f")});
    q += d.queries;
    v += d.videos;
  }
  rows.push_back({"Total", std::to_string(q), std::to_string(v), "--", "--"});
  out << render_grid({"Dataset", "Queries", "Videos", "Mean video (s)", "Mean segment (s)"}, rows, fmt);
  return 0;
}

// ---- argument wiring -------------------------------------------------------

inline void build_app(CLI::App& app, Options& o) {
  app.name(kProgram);
  app.description("Video temporal grounding toolkit: corpus ingest, query unification, sampling, grounding, evaluation, cost accounting.");
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
  app.add_flag("-v,--verbose", o.verbosity, "Increase diagnostic output (repeatable)");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  auto* ingest = app.add_subcommand("ingest", "Parse dataset annotations into the canonical corpus format");
  ingest->add_option("--dataset", o.ingest.dataset, "Dataset id (e.g. charades-sta, ego4d-nlq, custom:name)")->required();
  ingest->add_option("--annotations", o.ingest.annotations, "Annotation file")->required();
  ingest->add_option("--duration-index", o.ingest.duration_index, "Line-delimited {video_id, duration} sidecar");
  ingest->add_option("--format", o.ingest.format, "auto, charades, dense-caption, nlq, or jsonl");
  ingest->add_option("--split", o.ingest.split, "train, val, or test");
  ingest->add_option("--field-map", o.ingest.field_map, "JSON field-name overrides for the nlq/dense-caption adapters");
  ingest->add_option("--out", o.ingest.out, "Canonical corpus output (- for stdout)")->required();
  ingest->add_option("--report", o.ingest.report, "Write an ingest report (JSON)");

  auto* unify = app.add_subcommand("unify", "Rewrite raw queries into the canonical declarative form");
  unify->add_option("--in", o.unify.in, "Canonical corpus input")->required();
  unify->add_option("--out", o.unify.out, "Canonical corpus output (- for stdout)")->required();
  unify->add_option("--backend", o.unify.backend, "rules or llm");
  unify->add_option("--endpoint", o.unify.endpoint, "Chat-completions URL (llm backend)");
  unify->add_option("--model", o.unify.model, "Model name (llm backend)");
  unify->add_option("--prompt-file", o.unify.prompt_file, "System prompt override (default: bundled prompt)");
  unify->add_option("--api-key-env", o.unify.api_key_env, "Environment variable holding the API key");
  unify->add_option("--cache-dir", o.unify.cache_dir, "Response cache directory (llm backend)");
  unify->add_option("--max-concurrent", o.unify.max_concurrent, "Maximum requests in flight")->check(CLI::PositiveNumber);
  unify->add_option("--max-retries", o.unify.max_retries, "Retries per request after a transport failure")->check(CLI::NonNegativeNumber);
  unify->add_option("--timeout", o.unify.timeout, "Per-request timeout in seconds")->check(CLI::PositiveNumber);
  unify->add_option("--max-failure-fraction", o.unify.max_failure_fraction, "Abort when more than this fraction of calls fail")->check(CLI::Range(0.0, 1.0));
  unify->add_option("--report", o.unify.report, "Write the unifier cost report (JSON)");

  auto* sample = app.add_subcommand("sample", "Emit balanced batch manifests for one epoch");
  sample->add_option("--corpus", o.sample.corpus, "Canonical corpus input")->required();
  sample->add_option("--plan", o.sample.plan, "Sampling plan (JSON); overrides --stage defaults");
  sample->add_option("--stage", o.sample.stage, "I (pretraining) or II (target)");
  sample->add_option("--seed", o.sample.seed, "Random seed (required)")->required();
  sample->add_option("--iterations", o.sample.iterations, "Iterations per epoch (0: plan default)")->check(CLI::NonNegativeNumber);
  sample->add_option("--workers", o.sample.workers, "Threads generating replicas")->check(CLI::PositiveNumber);
  sample->add_option("--out", o.sample.out, "Batch manifest output (- for stdout)");

  auto* ground = app.add_subcommand("ground", "Ground queries against precomputed frame features");
  ground->add_option("--features", o.ground.features, "Directory of <video_id>.vtgf feature files")->required();
  ground->add_option("--queries", o.ground.queries, "Query embedding matrix (.vtgf layout)")->required();
  ground->add_option("--index", o.ground.index, "Line-delimited {row, uid[, video_id]} sidecar")->required();
  ground->add_option("--corpus", o.ground.corpus, "Canonical corpus mapping uid to video_id");
  ground->add_option("--windows", o.ground.windows, "Window lengths in seconds")->delimiter(',');
  ground->add_option("--stride", o.ground.stride, "Window stride in seconds")->check(CLI::PositiveNumber);
  ground->add_option("--nms-iou", o.ground.nms_iou, "NMS IoU threshold");
  ground->add_option("--top-k", o.ground.top_k, "Candidates kept per query")->check(CLI::PositiveNumber);
  ground->add_option("--workers", o.ground.workers, "Threads per video")->check(CLI::PositiveNumber);
  ground->add_option("--out", o.ground.out, "Prediction output (- for stdout)");

  auto* eval = app.add_subcommand("eval", "Recall@K at IoU thresholds per dataset");
  eval->add_option("--preds", o.eval.preds, "Prediction file")->required();
  eval->add_option("--gt", o.eval.gt, "Canonical corpus with ground-truth spans")->required();
  eval->add_option("--convention", o.eval.convention, "auto (per dataset), long {0.3,0.5}, or short {0.5,0.7}");
  eval->add_option("--format", o.eval.format, "aligned-text, comma-separated, or markdown-table");
  eval->add_option("--out", o.eval.out, "Report output (- for stdout)");

  auto* matrix = app.add_subcommand("matrix", "Render a cross-dataset train/test matrix");
  matrix->add_option("--cells", o.matrix.cells, "CSV train,test,value lines or JSON {cells:[...]}")->required();
  matrix->add_option("--format", o.matrix.format, "aligned-text, comma-separated, or markdown-table");
  matrix->add_option("--out", o.matrix.out, "Output (- for stdout)");

  auto* cost = app.add_subcommand("cost", "Feature-extraction and grounding compute for a video length");
  cost->add_option("--seconds", o.cost.seconds, "Video length in seconds")->required();
  cost->add_option("--method", o.cost.method, "all, universalvtg, or unitime");
  cost->add_option("--backbone", o.cost.backbone, "Swap the feature backbone of modeled methods");
  cost->add_option("--registry", o.cost.registry, "Backbone registry JSON (default: built-in table)");
  cost->add_option("--grounding-coefficient", o.cost.coefficient, "Grounding TFLOPs per second (0: built-in)");
  cost->add_option("--format", o.cost.format, "aligned-text, comma-separated, or markdown-table");
  cost->add_flag("--vit-check", o.cost.vit_check, "Also print the analytic ViT-L/14-336 estimate");

  auto* stats = app.add_subcommand("stats", "Per-dataset corpus statistics");
  stats->add_option("--corpus", o.stats.corpus, "Canonical corpus file(s)")->required();
  stats->add_option("--format", o.stats.format, "aligned-text, comma-separated, or markdown-table");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app;
  Options o;
  build_app(app, o);
  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands({})) known = known || sub->check_name(argv[1]);
    if (!known) {
      err << kProgram << ": unknown subcommand '" << argv[1] << "'\n\n" << app.help();
      return 1;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << kProgram << ": " << e.what() << "\n\n";
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return 1;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "ingest") return do_ingest(o, out, err);
    if (name == "unify") return do_unify(o, out, err);
    if (name == "sample") return do_sample(o, out, err);
    if (name == "ground") return do_ground(o, out, err);
    if (name == "eval") return do_eval(o, out, err);
    if (name == "matrix") return do_matrix(o, out, err);
    if (name == "cost") return do_cost(o, out, err);
    if (name == "stats") return do_stats(o, out, err);
    err << app.help();
    return 1;
  } catch (const ValidationError& e) {
    err << kProgram << ": error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    err << kProgram << ": I/O error: " << e.what() << "\n";
    return 2;
  } catch (const TransportError& e) {
    err << kProgram << ": transport error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << kProgram << ": error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace vtg::cli
