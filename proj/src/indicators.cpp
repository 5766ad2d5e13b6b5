#include "svda/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "svda/rng.hpp"

namespace svda {

const char* to_string(IndicatorName name) {
  switch (name) {
    case IndicatorName::entropy: return "entropy";
    case IndicatorName::effective_rank: return "effective_rank";
    case IndicatorName::alignment: return "alignment";
    case IndicatorName::selectivity: return "selectivity";
    case IndicatorName::sparsity: return "sparsity";
    case IndicatorName::robustness: return "robustness";
  }
  return "unknown";
}

double spectral_entropy(const Tensor& sigma) {
  double total = 0.0;
  for (double v : sigma.values()) total += std::fabs(v);
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (double v : sigma.values()) {
    const double p = std::fabs(v) / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  // clamp the tiny negative that roundoff can leave on a one-hot spectrum
  return h < 0.0 ? 0.0 : h;
}

double effective_rank(const Tensor& sigma) { return std::exp(spectral_entropy(sigma)); }

double angular_alignment(const AttentionRecord& rec) {
  const size_t n = rec.q_normalized.rows();
  const size_t d = rec.q_normalized.cols();
  if (rec.k_normalized.rows() != n || rec.k_normalized.cols() != d) {
    throw Error(ErrorKind::shape_mismatch, "alignment: Q " +
                                               shape_to_string(rec.q_normalized.shape()) +
                                               " vs K " +
                                               shape_to_string(rec.k_normalized.shape()));
  }
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* q = rec.q_normalized.values().data() + i * d;
    for (size_t j = 0; j < n; ++j) {
      const double* k = rec.k_normalized.values().data() + j * d;
      double dot = 0.0;
      for (size_t c = 0; c < d; ++c) dot += q[c] * k[c];
      total += dot;
    }
  }
  return total / static_cast<double>(n * n);
}

std::vector<double> angular_alignment_pairs(const AttentionRecord& rec) {
  const size_t n = rec.q_normalized.rows();
  const size_t d = rec.q_normalized.cols();
  std::vector<double> pairs;
  pairs.reserve(n * n);
  for (size_t i = 0; i < n; ++i) {
    const double* q = rec.q_normalized.values().data() + i * d;
    for (size_t j = 0; j < n; ++j) {
      const double* k = rec.k_normalized.values().data() + j * d;
      double dot = 0.0;
      for (size_t c = 0; c < d; ++c) dot += q[c] * k[c];
      pairs.push_back(dot);
    }
  }
  return pairs;
}

double selectivity(const Tensor& attention) {
  const size_t n = attention.rows();
  const size_t m = attention.cols();
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* row = attention.values().data() + i * m;
    double s = 0.0, sq = 0.0;
    for (size_t j = 0; j < m; ++j) {
      s += row[j];
      sq += row[j] * row[j];
    }
    total += 1.0 - sq / (s * s);
  }
  return total / static_cast<double>(n);
}

double spectral_sparsity(const Tensor& sigma, double eps) {
  if (eps <= 0.0) throw Error(ErrorKind::invalid_argument, "sparsity: eps must be positive");
  size_t below = 0;
  for (double v : sigma.values()) {
    if (std::fabs(v) < eps) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(sigma.numel());
}

double frobenius_distance(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw Error(ErrorKind::shape_mismatch, "frobenius_distance: " + shape_to_string(a.shape()) +
                                               " vs " + shape_to_string(b.shape()));
  double sq = 0.0;
  for (size_t i = 0; i < a.numel(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

Tensor perturbed_copy(const Tensor& x, double noise_std, uint64_t stream_seed) {
  Tensor out = x.detached_copy();
  Rng rng(stream_seed);
  for (double& v : out.values()) v += noise_std * rng.gaussian();
  return out;
}

double perturbation_robustness(const std::function<Tensor(const Tensor&)>& attention_of,
                               const Tensor& x, double noise_std, size_t num_draws,
                               uint64_t seed) {
  if (num_draws == 0) throw Error(ErrorKind::invalid_argument, "robustness: num_draws must be >= 1");
  if (noise_std < 0.0) throw Error(ErrorKind::invalid_argument, "robustness: noise_std must be >= 0");
  const Tensor clean = attention_of(x);
  double total = 0.0;
  for (size_t d = 0; d < num_draws; ++d) {
    const Tensor noisy = attention_of(perturbed_copy(x, noise_std, combine_seed(seed, d)));
    total += frobenius_distance(clean, noisy);
  }
  return total / static_cast<double>(num_draws);
}

std::vector<IndicatorSample> collect_epoch(const std::vector<AttentionRecord>& recs, size_t epoch,
                                           double sparsity_eps,
                                           const RobustnessSpec& robustness) {
  std::vector<IndicatorSample> samples;
  if (recs.empty()) return samples;

  struct Group {
    const AttentionRecord* first = nullptr;
    double alignment_sum = 0.0;
    double selectivity_sum = 0.0;
    size_t count = 0;
  };
  std::map<std::pair<size_t, size_t>, Group> groups;
  for (const AttentionRecord& rec : recs) {
    Group& g = groups[{rec.layer_index, rec.head_index}];
    if (!g.first) g.first = &rec;
    g.alignment_sum += angular_alignment(rec);
    g.selectivity_sum += selectivity(rec.attention);
    g.count += 1;
  }

  // One encoder replay per (scene, draw) covers every layer/head at once.
  std::map<std::pair<size_t, size_t>, double> robustness_means;
  if (!robustness.inputs.empty() && robustness.eval_records && robustness.num_draws > 0) {
    const size_t scenes = robustness.inputs.size();
    const size_t per_scene = recs.size() / scenes;
    if (per_scene * scenes != recs.size()) {
      throw Error(ErrorKind::invalid_argument,
                  "collect_epoch: record count " + std::to_string(recs.size()) +
                      " is not a multiple of the diagnostic batch size " + std::to_string(scenes));
    }
    std::map<std::pair<size_t, size_t>, double> sums;
    for (size_t s = 0; s < scenes; ++s) {
      std::map<std::pair<size_t, size_t>, const AttentionRecord*> clean;
      for (size_t r = 0; r < per_scene; ++r) {
        const AttentionRecord& rec = recs[s * per_scene + r];
        clean[{rec.layer_index, rec.head_index}] = &rec;
      }
      const uint64_t scene_seed = combine_seed(robustness.seed, s);
      for (size_t d = 0; d < robustness.num_draws; ++d) {
        const Tensor noisy_input =
            perturbed_copy(robustness.inputs[s], robustness.noise_std, combine_seed(scene_seed, d));
        const std::vector<AttentionRecord> noisy = robustness.eval_records(noisy_input);
        for (const AttentionRecord& rec : noisy) {
          auto it = clean.find({rec.layer_index, rec.head_index});
          if (it == clean.end()) {
            throw Error(ErrorKind::invalid_argument,
                        "collect_epoch: perturbed evaluation produced an unknown layer/head");
          }
          sums[{rec.layer_index, rec.head_index}] +=
              frobenius_distance(it->second->attention, rec.attention);
        }
      }
    }
    const double denom = static_cast<double>(scenes * robustness.num_draws);
    for (const auto& [key, sum] : sums) robustness_means[key] = sum / denom;
  }

  for (const auto& [key, group] : groups) {
    const auto emit = [&](IndicatorName name, double value) {
      samples.push_back(IndicatorSample{epoch, key.first, key.second, name, value});
    };
    const bool has_sigma = group.first->sigma_snapshot.has_value();
    if (has_sigma) {
      const double h = spectral_entropy(*group.first->sigma_snapshot);
      emit(IndicatorName::entropy, h);
      emit(IndicatorName::effective_rank, std::exp(h));
    }
    emit(IndicatorName::alignment, group.alignment_sum / static_cast<double>(group.count));
    emit(IndicatorName::selectivity, group.selectivity_sum / static_cast<double>(group.count));
    if (has_sigma) {
      emit(IndicatorName::sparsity, spectral_sparsity(*group.first->sigma_snapshot, sparsity_eps));
    }
    auto rit = robustness_means.find(key);
    if (rit != robustness_means.end()) emit(IndicatorName::robustness, rit->second);
  }
  return samples;
}

}  // namespace svda
