#include "svda/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "svda/error.hpp"

namespace svda {

DepthMetrics compute_metrics(const Tensor& pred, const Tensor& gt) {
  if (!pred.defined() || !gt.defined())
    throw Error(ErrorKind::invalid_argument, "compute_metrics: undefined tensor");
  if (pred.shape() != gt.shape())
    throw Error(ErrorKind::shape_mismatch, "compute_metrics: pred " +
                                               shape_to_string(pred.shape()) + " vs gt " +
                                               shape_to_string(gt.shape()));
  const size_t n = gt.numel();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "compute_metrics: empty tensors");

  double sum_abs_rel = 0.0, sum_sq_rel = 0.0, sum_sq = 0.0;
  double sum_log_sq = 0.0, sum_log = 0.0;
  size_t accurate = 0;
  for (size_t i = 0; i < n; ++i) {
    const double p = pred.values()[i];
    const double g = gt.values()[i];
    if (!(g > 0.0))
      throw Error(ErrorKind::invalid_argument,
                  "compute_metrics: ground-truth depth must be strictly positive");
    const double diff = p - g;
    sum_abs_rel += std::abs(diff) / g;
    sum_sq_rel += diff * diff / g;
    sum_sq += diff * diff;
    const double pc = std::max(p, 1e-6);
    const double e = std::log(pc) - std::log(g);
    sum_log_sq += e * e;
    sum_log += e;
    if (std::max(pc / g, g / pc) < 1.25) ++accurate;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  DepthMetrics m;
  m.abs_rel = sum_abs_rel * inv_n;
  m.sq_rel = sum_sq_rel * inv_n;
  m.rmse = std::sqrt(sum_sq * inv_n);
  m.rmse_log = std::sqrt(sum_log_sq * inv_n);
  const double mean_log = sum_log * inv_n;
  // Variance can round to a tiny negative when the residual is a pure shift.
  m.srmse_log = std::sqrt(std::max(0.0, sum_log_sq * inv_n - mean_log * mean_log));
  m.delta1 = static_cast<double>(accurate) * inv_n;
  return m;
}

DepthMetrics mean_metrics(const std::vector<DepthMetrics>& per_image) {
  if (per_image.empty())
    throw Error(ErrorKind::invalid_argument, "mean_metrics: no images");
  DepthMetrics m;
  for (const DepthMetrics& x : per_image) {
    m.abs_rel += x.abs_rel;
    m.sq_rel += x.sq_rel;
    m.rmse += x.rmse;
    m.rmse_log += x.rmse_log;
    m.srmse_log += x.srmse_log;
    m.delta1 += x.delta1;
  }
  const double inv = 1.0 / static_cast<double>(per_image.size());
  m.abs_rel *= inv;
  m.sq_rel *= inv;
  m.rmse *= inv;
  m.rmse_log *= inv;
  m.srmse_log *= inv;
  m.delta1 *= inv;
  return m;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::invalid_argument, "quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw Error(ErrorKind::invalid_argument, "quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

}  // namespace svda
