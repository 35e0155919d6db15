#pragma once

// Shared domain types and interval arithmetic.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "vtg/error.hpp"

namespace vtg {

// A closed interval [start, end] in seconds. Touching endpoints overlap with zero measure.
struct TimeSpan {
  double start = 0.0;
  double end = 0.0;

  bool valid() const noexcept {
    return std::isfinite(start) && std::isfinite(end) && start >= 0.0 && start <= end;
  }
  bool degenerate() const noexcept { return start == end; }
  double center() const noexcept { return 0.5 * (start + end); }

  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

inline TimeSpan make_span(double start, double end) {
  TimeSpan s{start, end};
  if (!s.valid()) {
    throw ValidationError("invalid span [" + std::to_string(start) + ", " + std::to_string(end) +
                          "]");
  }
  return s;
}

enum class Stage { Pretraining, Target };
enum class Perspective { Ego, Exo };

// Evaluation thresholds and ranks a benchmark reports.
struct BenchmarkConvention {
  std::vector<double> iou_thresholds;
  std::vector<int> ranks;

  static BenchmarkConvention long_form() { return {{0.3, 0.5}, {1, 5}}; }
  static BenchmarkConvention short_form() { return {{0.5, 0.7}, {1, 5}}; }

  friend bool operator==(const BenchmarkConvention&, const BenchmarkConvention&) = default;
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace detail

class DatasetId {
 public:
  enum class Kind {
    GoalStep,
    Ego4dNlq,
    Tacos,
    CharadesSta,
    ActivityNetCaptions,
    NaQ,
    Momentor,
    Coin,
    YouCook2,
    HiRest,
    Custom,
  };

  DatasetId() = default;
  DatasetId(Kind kind) : kind_(kind) {}  // NOLINT(google-explicit-constructor)

  static DatasetId custom(std::string name) {
    if (name.empty()) throw ValidationError("custom dataset name must be non-empty");
    DatasetId id(Kind::Custom);
    id.custom_ = std::move(name);
    return id;
  }

  // Accepts slugs ("charades-sta"), display names ("Charades-STA"), common aliases, and
  // "custom:<name>".
  static DatasetId parse(std::string_view text) {
    if (text.substr(0, 7) == "custom:" || text.substr(0, 7) == "Custom:") {
      return custom(std::string(text.substr(7)));
    }
    const std::string key = detail::lower(text);
    for (const auto& e : table()) {
      if (key == e.slug || key == detail::lower(e.display)) return DatasetId(e.kind);
      for (const char* alias : e.aliases) {
        if (alias != nullptr && key == alias) return DatasetId(e.kind);
      }
    }
    throw ValidationError("unknown dataset '" + std::string(text) +
                          "' (use custom:<name> for other corpora)");
  }

  Kind kind() const noexcept { return kind_; }

  std::string slug() const {
    if (kind_ == Kind::Custom) return "custom:" + custom_;
    return entry().slug;
  }

  std::string display_name() const {
    if (kind_ == Kind::Custom) return custom_;
    return entry().display;
  }

  Stage stage() const noexcept {
    switch (kind_) {
      case Kind::GoalStep:
      case Kind::Ego4dNlq:
      case Kind::Tacos:
      case Kind::CharadesSta:
      case Kind::ActivityNetCaptions:
        return Stage::Target;
      default:
        return Stage::Pretraining;
    }
  }

  Perspective perspective() const noexcept {
    switch (kind_) {
      case Kind::GoalStep:
      case Kind::Ego4dNlq:
      case Kind::NaQ:
        return Perspective::Ego;
      default:
        return Perspective::Exo;
    }
  }

  bool short_form() const noexcept {
    return kind_ == Kind::CharadesSta || kind_ == Kind::ActivityNetCaptions;
  }

  BenchmarkConvention convention() const {
    return short_form() ? BenchmarkConvention::short_form() : BenchmarkConvention::long_form();
  }

  friend bool operator==(const DatasetId& a, const DatasetId& b) {
    return a.kind_ == b.kind_ && a.custom_ == b.custom_;
  }
  friend auto operator<=>(const DatasetId& a, const DatasetId& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    return a.custom_.compare(b.custom_) <=> 0;
  }

  static std::vector<DatasetId> pretraining_sets() {
    return {Kind::NaQ, Kind::Momentor, Kind::Coin, Kind::YouCook2, Kind::HiRest};
  }
  static std::vector<DatasetId> target_sets() {
    return {Kind::GoalStep, Kind::Ego4dNlq, Kind::Tacos, Kind::CharadesSta,
            Kind::ActivityNetCaptions};
  }

 private:
  struct Entry {
    Kind kind;
    const char* slug;
    const char* display;
    std::array<const char*, 4> aliases;
  };

  static const std::array<Entry, 10>& table() {
    static const std::array<Entry, 10> t{{
        {Kind::GoalStep, "goalstep", "GoalStep", {"goalstep-stepgrounding", "ego4d-goalstep"}},
        {Kind::Ego4dNlq, "ego4d-nlq", "Ego4D-NLQ", {"nlq", "ego4d_nlq"}},
        {Kind::Tacos, "tacos", "TACoS", {}},
        {Kind::CharadesSta, "charades-sta", "Charades-STA", {"charades", "charades_sta"}},
        {Kind::ActivityNetCaptions,
         "activitynet-captions",
         "ActivityNet-Captions",
         {"activitynet", "anet", "anet-cap", "anet-captions"}},
        {Kind::NaQ, "naq", "NaQ", {}},
        {Kind::Momentor, "momentor", "Momentor", {}},
        {Kind::Coin, "coin", "COIN", {}},
        {Kind::YouCook2, "youcook2", "YouCook2", {}},
        {Kind::HiRest, "hirest", "HiREST", {}},
    }};
    return t;
  }

  const Entry& entry() const {
    for (const auto& e : table()) {
      if (e.kind == kind_) return e;
    }
    throw ValidationError("dataset has no table entry");
  }

  Kind kind_ = Kind::Custom;
  std::string custom_ = "unnamed";
};

inline const char* perspective_name(Perspective p) { return p == Perspective::Ego ? "ego" : "exo"; }

struct VideoMeta {
  std::string video_id;
  double duration = 0.0;
  DatasetId dataset;

  bool valid() const noexcept {
    return !video_id.empty() && std::isfinite(duration) && duration > 0.0;
  }
};

inline double span_length(const TimeSpan& s) noexcept { return s.end - s.start; }

inline double intersection_length(const TimeSpan& a, const TimeSpan& b) noexcept {
  return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

inline double enclosing_length(const TimeSpan& a, const TimeSpan& b) noexcept {
  return std::max(a.end, b.end) - std::min(a.start, b.start);
}

// Temporal IoU. Two degenerate spans score 1 when coincident and 0 otherwise.
inline double temporal_iou(const TimeSpan& a, const TimeSpan& b) noexcept {
  const double inter = intersection_length(a, b);
  const double uni = span_length(a) + span_length(b) - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

// Clamps both endpoints into [0, duration]. Throws when nothing of the span remains.
inline TimeSpan clip_to_video(const TimeSpan& s, const VideoMeta& v) {
  if (s.start >= v.duration) {
    throw ValidationError("span fully outside video '" + v.video_id + "'");
  }
  const double start = std::clamp(s.start, 0.0, v.duration);
  const double end = std::clamp(s.end, start, v.duration);
  return {start, end};
}

}  // namespace vtg
