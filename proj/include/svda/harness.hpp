#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "svda/datagen.hpp"
#include "svda/indicators.hpp"
#include "svda/metrics.hpp"
#include "svda/model.hpp"

namespace svda {

enum class OptimizerKind { sgd, adam };

const char* to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
  size_t epochs = 30;
  size_t batch_size = 16;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 42;
  size_t diagnostic_batch_size = 8;
  double sparsity_eps = 0.01;
  double robustness_noise_std = 0.01;
  size_t robustness_draws = 8;

  // learning_rate 0 is legal and freezes the parameters; negative is not.
  void validate() const;
};

struct EpochLog {
  size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  DepthMetrics val_metrics;
  std::vector<IndicatorSample> indicators;
};

struct Dataset {
  std::vector<Scene> train;
  std::vector<Scene> val;
};

/// Train scenes are spec indices [0, count); validation scenes continue at
/// [count, count + val_count), so the split never overlaps.
Dataset build_dataset(const DatasetSpec& spec);

/// Loads every pair listed in a manifest; relative paths resolve against the
/// manifest's directory.
std::vector<Scene> load_scenes(const std::filesystem::path& manifest_path);

/// First-differences update on all learnable tensors returned by
/// named_params; handles share storage with the model, so step() mutates the
/// model in place.
class Optimizer {
 public:
  Optimizer(const TrainConfig& config, std::vector<NamedParam> params);
  void step();

 private:
  TrainConfig config_;
  std::vector<NamedParam> params_;
  std::vector<std::vector<double>> m_, v_;  // adam moments, per tensor
  size_t t_ = 0;
};

struct TrainResult {
  ModelConfig config;
  ModelParams final_params;
  ModelParams best_params;  // epoch minimizing validation abs_rel, earliest on ties
  size_t best_epoch = 0;    // 1-based
  std::vector<EpochLog> logs;
};

/// Minibatch L1 training on normalized depth with per-epoch validation and
/// indicator collection on a fixed diagnostic batch (the first
/// diagnostic_batch_size validation scenes).
TrainResult train(const ModelConfig& config, const Dataset& data, const TrainConfig& tc);

/// Metrics averaged per image, then over images.
DepthMetrics evaluate(const ModelParams& params, const ModelConfig& config,
                      const std::vector<Scene>& scenes);

/// Same averaging with an arbitrary predictor; lets tests swap in oracles.
DepthMetrics evaluate_with(const std::function<Tensor(const Scene&)>& predict,
                           const std::vector<Scene>& scenes);

/// Box-plot summary of one indicator's distribution over a diagnostic batch.
struct LayerwiseRow {
  size_t layer = 0;
  size_t head = 0;
  std::string indicator;
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};

/// Per-scene indicator values summarized per (layer, head, indicator), rows
/// ordered by layer, then head, then a fixed indicator order. Alignment also
/// gets 5th/50th/95th pair-percentile rows (alignment_p05/p50/p95).
std::vector<LayerwiseRow> diagnose_layerwise(const ModelParams& params,
                                             const ModelConfig& config,
                                             const std::vector<Scene>& scenes,
                                             double sparsity_eps, double noise_std,
                                             size_t draws, uint64_t seed);

struct TrendRow {
  Mechanism mechanism = Mechanism::svda;
  IndicatorName indicator = IndicatorName::entropy;
  double first_mean = 0.0;  // mean over the first `window` epochs
  double last_mean = 0.0;   // mean over the last `window` epochs
  double delta = 0.0;       // last_mean - first_mean
};

/// Per-indicator first-vs-last window means over a run's logs. Indicators
/// with no samples (sigma-based ones on the baseline) produce no row.
std::vector<TrendRow> indicator_trends(const std::vector<EpochLog>& logs, Mechanism mechanism,
                                       size_t window = 10);

struct CompareResult {
  TrainResult svda_run;
  TrainResult baseline_run;
  std::vector<TrendRow> trends;  // svda rows first, then baseline
};

/// Trains both mechanisms from the same seed and data.
CompareResult compare(const ModelConfig& base_config, const Dataset& data,
                      const TrainConfig& tc);

}  // namespace svda
