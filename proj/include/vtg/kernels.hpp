#pragma once

// Reference loss kernels with analytic gradients: focal classification loss,
// 1-D distance-IoU regression loss, and their weighted combination.
// Everything here is double precision and side-effect free.

#include <cmath>
#include <string>

#include "vtg/core.hpp"
#include "vtg/error.hpp"

namespace vtg {

struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("focal alpha must lie in [0,1]");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("focal gamma must be non-negative");
  }
};

struct LossWeights {
  double lambda_cls = 1.0;
  double lambda_reg = 1.0;

  void validate() const {
    if (!(lambda_cls >= 0.0) || !(lambda_reg >= 0.0) || !std::isfinite(lambda_cls) ||
        !std::isfinite(lambda_reg)) {
      throw ValidationError("loss weights must be finite and non-negative");
    }
  }
};

struct FocalResult {
  double value = 0.0;
  double d_dp = 0.0;  // derivative with respect to the predicted probability p
};

// -alpha (1-p_t)^gamma ln(p_t), with p_t = p for target 1 and 1-p for target 0.
inline FocalResult focal_loss(double p, int target, const FocalParams& params = {}) {
  params.validate();
  if (target != 0 && target != 1) throw ValidationError("focal target must be 0 or 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probability outside [0,1]");
  const double pt = target == 1 ? p : 1.0 - p;
  if (pt <= 0.0) throw ValidationError("log of nonpositive");
  const double a = params.alpha, g = params.gamma;
  const double q = 1.0 - pt;
  const double log_pt = std::log(pt);
  FocalResult r;
  r.value = -a * std::pow(q, g) * log_pt;
  if (r.value == 0.0) r.value = 0.0;  // normalize -0
  // d/dp_t; the (1-p_t)^(gamma-1) ln p_t term vanishes when gamma = 0 or p_t = 1.
  double d_dpt = -a * std::pow(q, g) / pt;
  if (g != 0.0 && q > 0.0) d_dpt += a * g * std::pow(q, g - 1.0) * log_pt;
  r.d_dp = target == 1 ? d_dpt : -d_dpt;
  return r;
}

namespace kernel_detail {

inline void check_pair(const TimeSpan& pred, const TimeSpan& gt) {
  if (!pred.valid() || !gt.valid()) throw ValidationError("invalid span");
}

}  // namespace kernel_detail

// IoU(pred, gt) - d^2 / c^2 with d the center distance and c the enclosing length.
inline double diou_1d(const TimeSpan& pred, const TimeSpan& gt) {
  kernel_detail::check_pair(pred, gt);
  const double c = enclosing_length(pred, gt);
  if (c == 0.0) return 1.0;
  const double d = pred.center() - gt.center();
  const double inter = intersection_length(pred, gt);
  const double uni = span_length(pred) + span_length(gt) - inter;
  const double iou = uni > 0.0 ? inter / uni : 0.0;
  return iou - (d * d) / (c * c);
}

struct DiouLossResult {
  double value = 0.0;
  double d_start = 0.0;
  double d_end = 0.0;
};

// 1 - diou_1d with its gradient in (pred.start, pred.end). At boundary
// alignments (where a max/min switches branch) the right derivative is used.
inline DiouLossResult diou_loss(const TimeSpan& pred, const TimeSpan& gt) {
  kernel_detail::check_pair(pred, gt);
  const double s = pred.start, e = pred.end, g1 = gt.start, g2 = gt.end;
  const double c = std::max(e, g2) - std::min(s, g1);
  DiouLossResult r;
  // At the minimum the one-sided slopes are nonzero; report the zero subgradient.
  if (c == 0.0 || pred == gt) return r;

  const double x = std::min(e, g2) - std::max(s, g1);
  const double dx_ds = s >= g1 ? -1.0 : 0.0;
  const double dx_de = e < g2 ? 1.0 : 0.0;
  auto clamp_slope = [x](double slope) {
    if (x > 0.0) return slope;
    if (x == 0.0) return std::max(0.0, slope);
    return 0.0;
  };
  const double inter = std::max(0.0, x);
  const double di_ds = clamp_slope(dx_ds);
  const double di_de = clamp_slope(dx_de);

  const double uni = (e - s) + (g2 - g1) - inter;
  double iou = 0.0, diou_ds = 0.0, diou_de = 0.0;
  if (uni > 0.0) {
    iou = inter / uni;
    const double du_ds = -1.0 - di_ds;
    const double du_de = 1.0 - di_de;
    diou_ds = (di_ds * uni - inter * du_ds) / (uni * uni);
    diou_de = (di_de * uni - inter * du_de) / (uni * uni);
  }

  const double m = 0.5 * (s + e) - 0.5 * (g1 + g2);
  const double dc_ds = s < g1 ? -1.0 : 0.0;
  const double dc_de = e >= g2 ? 1.0 : 0.0;
  const double c2 = c * c;
  // d(m^2/c^2) = m m' * 2 / c^2 - 2 m^2 c' / c^3, with m' = 1/2.
  const double dp_ds = m / c2 - 2.0 * m * m * dc_ds / (c2 * c);
  const double dp_de = m / c2 - 2.0 * m * m * dc_de / (c2 * c);

  r.value = 1.0 - (iou - m * m / c2);
  r.d_start = -(diou_ds - dp_ds);
  r.d_end = -(diou_de - dp_de);
  return r;
}

// lambda_cls * cls + lambda_reg * reg + contrast. The contrastive term is
// computed elsewhere and passed through unweighted.
inline double total_loss(double cls, double reg, double contrast = 0.0, const LossWeights& w = {}) {
  w.validate();
  if (!std::isfinite(cls) || !std::isfinite(reg) || !std::isfinite(contrast)) {
    throw ValidationError("loss terms must be finite");
  }
  return w.lambda_cls * cls + w.lambda_reg * reg + contrast;
}

}  // namespace vtg
