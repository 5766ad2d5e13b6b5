#pragma once

#include <functional>
#include <string>
#include <vector>

#include "svda/attention.hpp"
#include "svda/tensor.hpp"

namespace svda {

enum class IndicatorName {
  entropy,
  effective_rank,
  alignment,
  selectivity,
  sparsity,
  robustness,
};

const char* to_string(IndicatorName name);

struct IndicatorSample {
  size_t epoch = 0;
  size_t layer = 0;
  size_t head = 0;
  IndicatorName name = IndicatorName::entropy;
  double value = 0.0;
};

/// Shannon entropy of p_i = |sigma_i| / sum|sigma_j|, natural log.
/// Zero-probability terms contribute nothing; an all-zero sigma gives 0.
double spectral_entropy(const Tensor& sigma);

/// e^H, a continuous proxy for the number of active spectral directions.
double effective_rank(const Tensor& sigma);

/// Mean cosine Q_i . K_j over all n^2 (query, key) row pairs.
double angular_alignment(const AttentionRecord& rec);

/// All n^2 pair cosines, row-major, for distribution export.
std::vector<double> angular_alignment_pairs(const AttentionRecord& rec);

/// Mean over rows of 1 - sum_j A_ij^2 / (sum_j A_ij)^2.
double selectivity(const Tensor& attention);

/// Fraction of entries with |sigma_i| < eps.
double spectral_sparsity(const Tensor& sigma, double eps);

/// sqrt of the summed squared entrywise differences.
double frobenius_distance(const Tensor& a, const Tensor& b);

/// Detached copy of x with i.i.d. Gaussian(0, noise_std^2) noise added,
/// drawn from a generator seeded with stream_seed.
Tensor perturbed_copy(const Tensor& x, double noise_std, uint64_t stream_seed);

/// Mean over draws of ||A(x) - A(x + delta)||_F with delta entries i.i.d.
/// Gaussian(0, noise_std^2); draw d uses the stream combine_seed(seed, d).
double perturbation_robustness(const std::function<Tensor(const Tensor&)>& attention_of,
                               const Tensor& x, double noise_std, size_t num_draws,
                               uint64_t seed);

/// Batch robustness evaluation settings plus the means to re-run the encoder.
/// inputs holds one token tensor per diagnostic scene; scene s perturbs with
/// streams combine_seed(combine_seed(seed, s), draw).
struct RobustnessSpec {
  double noise_std = 0.01;
  size_t num_draws = 8;
  uint64_t seed = 0;
  std::vector<Tensor> inputs;
  std::function<std::vector<AttentionRecord>(const Tensor&)> eval_records;
};

/// Aggregates one epoch of diagnostics. recs holds the clean records for the
/// whole diagnostic batch (scenes appended in order, each contributing one
/// record per layer/head). Emits, per (layer, head) in ascending order:
/// entropy, effective_rank, alignment, selectivity, sparsity, robustness —
/// the sigma-based three only when sigma snapshots are present, robustness
/// only when the spec carries inputs.
std::vector<IndicatorSample> collect_epoch(const std::vector<AttentionRecord>& recs,
                                           size_t epoch, double sparsity_eps,
                                           const RobustnessSpec& robustness);

}  // namespace svda
