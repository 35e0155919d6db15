#pragma once

// Compute-cost accounting: a per-minute feature-extraction registry, an
// analytic ViT operation count for cross-checking it, a linear grounding-cost
// model, and per-method comparisons at a given video length.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vtg/core.hpp"
#include "vtg/error.hpp"
#include "vtg/table.hpp"

namespace vtg {

enum class BackboneKind { Image, Video };
enum class CostProvenance { Registered, Estimated };

struct BackboneSpec {
  std::string name;
  BackboneKind kind = BackboneKind::Image;
  double sample_rate = 2.0;     // frames (or clips) per second
  double tflops_per_min = 0.0;  // feature extraction per minute of video
  CostProvenance provenance = CostProvenance::Registered;

  void validate() const {
    if (name.empty()) throw ValidationError("backbone needs a name");
    if (!(tflops_per_min > 0.0) || !std::isfinite(tflops_per_min)) {
      throw ValidationError("backbone '" + name + "': tflops_per_min must be positive");
    }
    if (!(sample_rate > 0.0)) throw ValidationError("backbone '" + name + "': sample_rate must be positive");
  }
};

inline const std::vector<BackboneSpec>& default_backbones() {
  static const std::vector<BackboneSpec> specs{
      {"SlowFast", BackboneKind::Video, 1.88, 7.40, CostProvenance::Registered},
      {"EgoVLP", BackboneKind::Video, 1.88, 83.1, CostProvenance::Registered},
      {"InternVideo", BackboneKind::Video, 1.88, 161.0, CostProvenance::Registered},
      {"CLIP-ViT-L14", BackboneKind::Image, 2.0, 21.0, CostProvenance::Registered},
      {"PerceptionEncoder-L", BackboneKind::Image, 2.0, 21.1, CostProvenance::Registered},
  };
  return specs;
}

class BackboneRegistry {
 public:
  BackboneRegistry() : specs_(default_backbones()) {}
  explicit BackboneRegistry(std::vector<BackboneSpec> specs) : specs_(std::move(specs)) {
    for (const auto& s : specs_) s.validate();
  }

  // {"backbones": [{"name", "kind", "sample_rate", "tflops_per_min", "provenance"}, ...]}
  static BackboneRegistry from_json(const nlohmann::json& j) {
    std::vector<BackboneSpec> specs;
    try {
      for (const auto& b : j.at("backbones")) {
        BackboneSpec s;
        s.name = b.at("name").get<std::string>();
        const auto kind = b.value("kind", std::string("image"));
        if (kind != "image" && kind != "video") throw ValidationError("unknown backbone kind '" + kind + "'");
        s.kind = kind == "video" ? BackboneKind::Video : BackboneKind::Image;
        s.sample_rate = b.value("sample_rate", 2.0);
        s.tflops_per_min = b.at("tflops_per_min").get<double>();
        const auto prov = b.value("provenance", std::string("registered"));
        s.provenance = prov == "estimated" ? CostProvenance::Estimated : CostProvenance::Registered;
        specs.push_back(std::move(s));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad backbone registry: ") + e.what());
    }
    return BackboneRegistry(std::move(specs));
  }

  static BackboneRegistry load(std::istream& in) {
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("bad backbone registry: ") + e.what());
    }
  }

  // Case-insensitive; also accepts a few short aliases.
  const BackboneSpec& find(std::string_view name) const {
    std::string k = detail::lower(name);
    if (k == "pe-l" || k == "pe" || k == "perception-encoder") k = "perceptionencoder-l";
    if (k == "clip" || k == "clip-l14") k = "clip-vit-l14";
    for (const auto& s : specs_) {
      if (detail::lower(s.name) == k) return s;
    }
    throw ValidationError("unknown backbone '" + std::string(name) + "'");
  }

  const std::vector<BackboneSpec>& specs() const { return specs_; }

 private:
  std::vector<BackboneSpec> specs_;
};

// ---- analytic ViT estimate -------------------------------------------------

struct VitShape {
  int image_side = 224;
  int patch_side = 16;
  int layers = 12;
  int width = 768;
  int mlp_width = 3072;

  static VitShape vit_l14_336() { return {336, 14, 24, 1024, 4096}; }

  void validate() const {
    if (image_side <= 0 || patch_side <= 0 || layers <= 0 || width <= 0 || mlp_width <= 0) {
      throw ValidationError("ViT shape fields must be positive");
    }
    if (image_side % patch_side != 0) throw ValidationError("image side not divisible by patch side");
  }

  long long tokens() const {
    const long long g = image_side / patch_side;
    return g * g + 1;
  }
};

enum class OpConvention { Macs, Flops };

// Per layer: 4 n w^2 (q/k/v/out projections) + 2 n^2 w (scores and mixing)
// + 2 n w m (MLP). Patch embedding, norms and softmax are ignored.
inline double vit_flops_per_frame(const VitShape& s, OpConvention c = OpConvention::Macs) {
  s.validate();
  const double n = static_cast<double>(s.tokens());
  const double w = s.width, m = s.mlp_width;
  const double per_layer = 4.0 * n * w * w + 2.0 * n * n * w + 2.0 * n * w * m;
  const double macs = per_layer * s.layers;
  return c == OpConvention::Flops ? 2.0 * macs : macs;
}

inline double vit_tflops_per_min(const VitShape& s, double frames_per_second,
                                 OpConvention c = OpConvention::Macs) {
  return vit_flops_per_frame(s, c) * frames_per_second * 60.0 / 1e12;
}

// ---- per-video cost --------------------------------------------------------

inline double feature_cost(const BackboneSpec& spec, double video_seconds) {
  if (!(video_seconds >= 0.0)) throw ValidationError("video length must be non-negative");
  return spec.tflops_per_min * video_seconds / 60.0;
}

// Grounding cost scales linearly with video length from one measured point.
struct LinearGroundingModel {
  double reference_tflops = 0.0865;
  double reference_seconds = 500.0;

  double coefficient() const { return reference_tflops / reference_seconds; }
  double at(double seconds) const { return reference_tflops * (seconds / reference_seconds); }
};

inline double grounding_cost(double video_seconds, double coefficient) {
  if (!(coefficient > 0.0)) throw ValidationError("grounding coefficient must be positive");
  if (!(video_seconds >= 0.0)) throw ValidationError("video length must be non-negative");
  return coefficient * video_seconds;
}

// Default model, evaluated as a ratio so the reference point is reproduced exactly.
inline double grounding_cost(double video_seconds) {
  if (!(video_seconds >= 0.0)) throw ValidationError("video length must be non-negative");
  return LinearGroundingModel{}.at(video_seconds);
}

struct RuntimeAnnotation {
  double feature_s = 0.0;
  double grounding_s = 0.0;
  double total_s = 0.0;
};

// A measured (not modeled) cost point for one video length.
struct RegisteredPoint {
  double seconds = 0.0;
  double feature_tflops = 0.0;
  double grounding_tflops = 0.0;
  double total_tflops = 0.0;
  std::optional<RuntimeAnnotation> runtime;
};

struct MethodSpec {
  std::string name;
  std::optional<BackboneSpec> backbone;         // feature model, when linear
  std::optional<LinearGroundingModel> grounding;  // grounding model, when linear
  std::vector<RegisteredPoint> registered;      // used verbatim when no model exists

  bool modeled() const { return backbone.has_value() && grounding.has_value(); }

  const RegisteredPoint* point_at(double seconds) const {
    for (const auto& p : registered) {
      if (std::fabs(p.seconds - seconds) < 1e-9) return &p;
    }
    return nullptr;
  }
};

inline const std::vector<MethodSpec>& default_methods() {
  static const std::vector<MethodSpec> methods = [] {
    std::vector<MethodSpec> m;
    MethodSpec ours;
    ours.name = "UniversalVTG";
    ours.backbone = BackboneRegistry{}.find("PerceptionEncoder-L");
    ours.grounding = LinearGroundingModel{};
    // Only the runtime annotations are used from these points.
    ours.registered = {{500.0, 175, 0.0865, 175, RuntimeAnnotation{11.1, 0.0886, 11.2}},
                       {900.0, 317, 0.155, 317, RuntimeAnnotation{19.3, 0.0928, 19.4}}};
    m.push_back(ours);
    MethodSpec unitime;
    unitime.name = "UniTime";
    unitime.registered = {{500.0, 2184, 579, 2763, RuntimeAnnotation{72.1, 35.4, 107.6}},
                          {900.0, 5384, 588, 5972, RuntimeAnnotation{154.6, 80.2, 234.8}}};
    m.push_back(unitime);
    return m;
  }();
  return methods;
}

inline const MethodSpec& find_method(std::string_view name, const std::vector<MethodSpec>& methods = default_methods()) {
  for (const auto& m : methods) {
    if (detail::lower(m.name) == detail::lower(name)) return m;
  }
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

struct CostEstimate {
  std::string method;
  double video_seconds = 0.0;
  double feature_tflops = 0.0;
  double grounding_tflops = 0.0;
  double total_tflops = 0.0;
  bool registered = false;  // values copied from a measured point
  std::optional<RuntimeAnnotation> runtime;
};

inline CostEstimate estimate_cost(const MethodSpec& m, double video_seconds) {
  CostEstimate e;
  e.method = m.name;
  e.video_seconds = video_seconds;
  const RegisteredPoint* p = m.point_at(video_seconds);
  if (p) e.runtime = p->runtime;
  if (m.modeled()) {
    e.feature_tflops = feature_cost(*m.backbone, video_seconds);
    e.grounding_tflops = m.grounding->at(video_seconds);
  } else if (p) {
    e.feature_tflops = p->feature_tflops;
    e.grounding_tflops = p->grounding_tflops;
    e.registered = true;
  } else {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%g", video_seconds);
    throw ValidationError(m.name + " at " + secs + " s: no cost model; registered points only");
  }
  e.total_tflops = e.feature_tflops + e.grounding_tflops;
  return e;
}

inline std::vector<CostEstimate> compare_methods(const std::vector<MethodSpec>& methods, double video_seconds) {
  std::vector<CostEstimate> out;
  for (const auto& m : methods) out.push_back(estimate_cost(m, video_seconds));
  return out;
}

inline std::string render_costs(const std::vector<CostEstimate>& rows, RenderFormat fmt) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  std::vector<std::string> header{"Method",          "Seconds",        "Feat. TFLOPs",      "Grounding TFLOPs",
                                  "Total TFLOPs",    "Feat. runtime (s)", "Grounding runtime (s)",
                                  "Total runtime (s)", "Source"};
  std::vector<std::vector<std::string>> body;
  for (const auto& e : rows) {
    std::vector<std::string> r{e.method, num(e.video_seconds), num(e.feature_tflops),
                               num(e.grounding_tflops), num(e.total_tflops)};
    if (e.runtime) {
      r.push_back(num(e.runtime->feature_s));
      r.push_back(num(e.runtime->grounding_s));
      r.push_back(num(e.runtime->total_s));
    } else {
      r.insert(r.end(), 3, "--");
    }
    r.push_back(e.registered ? "registered" : "model");
    body.push_back(std::move(r));
  }
  return render_grid(header, body, fmt);
}

// ---- unifier compute ---------------------------------------------------------

struct UnifierCompute {
  std::string model;
  double prefill_seconds = 0.0;
  double decode_seconds = 0.0;
  double tflops_per_query = 0.0;
};

inline const std::vector<UnifierCompute>& default_unifier_compute() {
  static const std::vector<UnifierCompute> table{
      {"Qwen3-4B", 0.105, 0.340, 0.136},
      {"Qwen3-30B", 0.333, 1.38, 0.84},
      {"Llama3.1-70B", 0.14, 0.891, 1.96},
  };
  return table;
}

inline std::optional<UnifierCompute> find_unifier_compute(std::string_view model) {
  for (const auto& u : default_unifier_compute()) {
    if (detail::lower(u.model) == detail::lower(model)) return u;
  }
  return std::nullopt;
}

}  // namespace vtg
