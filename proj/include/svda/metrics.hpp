#pragma once

#include <vector>

#include "svda/tensor.hpp"

namespace svda {

/// The six depth-error columns, always in this order:
/// abs_rel, sq_rel, rmse, rmse_log, srmse_log, delta1.
struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double srmse_log = 0.0;  // scale-invariant log RMSE: sqrt(var of ln p - ln g)
  double delta1 = 0.0;     // fraction with max(p/g, g/p) < 1.25
};

/// Elementwise metrics over one prediction/ground-truth pair of equal shape.
/// gt must be strictly positive; pred is clamped to [1e-6, inf) for the log
/// and ratio terms so a degenerate prediction scores badly instead of
/// producing non-finite values.
DepthMetrics compute_metrics(const Tensor& pred, const Tensor& gt);

/// Component-wise mean; the per-image averaging convention used everywhere.
DepthMetrics mean_metrics(const std::vector<DepthMetrics>& per_image);

/// Linear-interpolation quantile of an unsorted, non-empty sample; q in [0,1].
double quantile(std::vector<double> values, double q);

}  // namespace svda
