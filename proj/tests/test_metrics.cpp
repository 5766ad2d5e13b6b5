#include <doctest.h>

#include <cmath>
#include <vector>

#include "svda/metrics.hpp"
#include "svda/rng.hpp"
#include "testutil.hpp"

using namespace svda;
using testutil::random_tensor;

TEST_SUITE("metrics") {

TEST_CASE("perfect prediction scores zero error and full accuracy") {
  Tensor gt = Tensor::from_values({2, 2}, {0.25, 0.5, 0.75, 1.0});
  DepthMetrics m = compute_metrics(gt, gt);
  CHECK(m.abs_rel == 0.0);
  CHECK(m.sq_rel == 0.0);
  CHECK(m.rmse == 0.0);
  CHECK(m.rmse_log == 0.0);
  CHECK(m.srmse_log == 0.0);
  CHECK(m.delta1 == 1.0);
}

TEST_CASE("hand-computed pair") {
  Tensor pred = Tensor::from_values({2}, {1.0, 2.0});
  Tensor gt = Tensor::from_values({2}, {2.0, 2.0});
  DepthMetrics m = compute_metrics(pred, gt);
  CHECK(std::fabs(m.abs_rel - 0.25) < 1e-12);
  CHECK(std::fabs(m.sq_rel - 0.25) < 1e-12);
  CHECK(std::fabs(m.rmse - std::sqrt(0.5)) < 1e-12);
  CHECK(std::fabs(m.rmse_log - std::log(2.0) / std::sqrt(2.0)) < 1e-12);
  CHECK(std::fabs(m.srmse_log - std::log(2.0) / 2.0) < 1e-12);
  CHECK(m.delta1 == 0.5);  // ratio 2 fails, ratio 1 passes
}

TEST_CASE("pure scaling is a shift in log space") {
  Rng rng(7);
  Tensor gt = random_tensor({4, 4}, rng, 0.2, 1.0);
  Tensor pred = gt.detached_copy();
  for (double& v : pred.values()) v *= 1.3;
  DepthMetrics m = compute_metrics(pred, gt);
  CHECK(m.delta1 == 0.0);  // 1.3 is outside the strict < 1.25 threshold
  CHECK(m.srmse_log < 1e-12);
  CHECK(std::fabs(m.rmse_log - std::log(1.3)) < 1e-12);

  // the boundary itself fails too, the comparison is strict; dyadic ground
  // truth keeps the 1.25x products exact so the ratio is exactly 1.25
  Tensor dyadic = Tensor::from_values({4}, {0.25, 0.5, 0.75, 1.0});
  Tensor boundary = dyadic.detached_copy();
  for (double& v : boundary.values()) v *= 1.25;
  CHECK(compute_metrics(boundary, dyadic).delta1 == 0.0);
  Tensor inside = dyadic.detached_copy();
  for (double& v : inside.values()) v *= 1.249;
  CHECK(compute_metrics(inside, dyadic).delta1 == 1.0);
}

TEST_CASE("shift-invariant log error never exceeds the raw log error") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor gt = random_tensor({8}, rng, 0.05, 1.0);
    Tensor pred = random_tensor({8}, rng, 0.0, 1.2);
    DepthMetrics m = compute_metrics(pred, gt);
    CHECK(m.srmse_log <= m.rmse_log + 1e-12);
    CHECK(std::isfinite(m.abs_rel));
    CHECK(std::isfinite(m.rmse_log));
    CHECK(m.delta1 >= 0.0);
    CHECK(m.delta1 <= 1.0);
  }
}

TEST_CASE("delta1 is symmetric in prediction and ground truth") {
  Rng rng(13);
  Tensor a = random_tensor({16}, rng, 0.1, 1.0);
  Tensor b = random_tensor({16}, rng, 0.1, 1.0);
  CHECK(compute_metrics(a, b).delta1 == compute_metrics(b, a).delta1);
}

TEST_CASE("scale behaviour of each column") {
  Rng rng(17);
  Tensor gt = random_tensor({10}, rng, 0.2, 1.0);
  Tensor pred = random_tensor({10}, rng, 0.2, 1.0);
  DepthMetrics base = compute_metrics(pred, gt);

  Tensor pred2 = pred.detached_copy();
  Tensor gt2 = gt.detached_copy();
  for (double& v : pred2.values()) v *= 2.0;
  for (double& v : gt2.values()) v *= 2.0;
  DepthMetrics scaled = compute_metrics(pred2, gt2);

  CHECK(scaled.abs_rel == doctest::Approx(base.abs_rel).epsilon(1e-12));
  CHECK(scaled.sq_rel == doctest::Approx(2.0 * base.sq_rel).epsilon(1e-12));
  CHECK(scaled.rmse == doctest::Approx(2.0 * base.rmse).epsilon(1e-12));
  CHECK(scaled.rmse_log == doctest::Approx(base.rmse_log).epsilon(1e-12));
  CHECK(scaled.srmse_log == doctest::Approx(base.srmse_log).epsilon(1e-12));
  CHECK(scaled.delta1 == base.delta1);
}

TEST_CASE("degenerate predictions stay finite through the clamp") {
  Tensor gt = Tensor::from_values({2}, {0.5, 0.5});
  Tensor pred = Tensor::from_values({2}, {0.0, -1.0});
  DepthMetrics m = compute_metrics(pred, gt);
  CHECK(std::isfinite(m.rmse_log));
  CHECK(std::isfinite(m.srmse_log));
  CHECK(m.delta1 == 0.0);
  // abs_rel sees the raw prediction
  CHECK(m.abs_rel == doctest::Approx((0.5 / 0.5 + 1.5 / 0.5) / 2.0).epsilon(1e-12));
}

TEST_CASE("invalid inputs are rejected") {
  Tensor a = Tensor::from_values({2}, {0.5, 0.5});
  Tensor b = Tensor::from_values({3}, {0.5, 0.5, 0.5});
  CHECK_THROWS_AS(compute_metrics(a, b), Error);
  Tensor zero_gt = Tensor::from_values({2}, {0.5, 0.0});
  CHECK_THROWS_AS(compute_metrics(a, zero_gt), Error);
  Tensor neg_gt = Tensor::from_values({2}, {0.5, -0.5});
  CHECK_THROWS_AS(compute_metrics(a, neg_gt), Error);
  CHECK_THROWS_AS(compute_metrics(Tensor{}, a), Error);
}

TEST_CASE("component-wise averaging over images") {
  DepthMetrics a;
  a.abs_rel = 0.2;
  a.rmse = 1.0;
  a.delta1 = 1.0;
  DepthMetrics b;
  b.abs_rel = 0.4;
  b.rmse = 3.0;
  b.delta1 = 0.0;
  DepthMetrics m = mean_metrics({a, b});
  CHECK(m.abs_rel == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(m.rmse == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m.delta1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(mean_metrics({}), Error);
}

TEST_CASE("quantile interpolation") {
  std::vector<double> v = {3.0, 1.0, 4.0, 2.0};  // unsorted on purpose
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(quantile(v, 0.75) == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(quantile({7.0}, 0.5) == 7.0);
  CHECK_THROWS_AS(quantile({}, 0.5), Error);
  CHECK_THROWS_AS(quantile(v, -0.1), Error);
  CHECK_THROWS_AS(quantile(v, 1.1), Error);
}

}  // TEST_SUITE
