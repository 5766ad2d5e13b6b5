#include "svda/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "svda/io.hpp"
#include "svda/ops.hpp"

namespace svda {

const char* to_string(OptimizerKind k) {
  return k == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw Error(ErrorKind::config, "unknown optimizer '" + s + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
  if (epochs == 0) throw Error(ErrorKind::config, "epochs must be at least 1");
  if (batch_size == 0) throw Error(ErrorKind::config, "batch_size must be at least 1");
  if (learning_rate < 0.0) throw Error(ErrorKind::config, "learning_rate must be non-negative");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
    throw Error(ErrorKind::config, "adam betas must lie in [0, 1)");
  if (adam_eps <= 0.0) throw Error(ErrorKind::config, "adam eps must be positive");
  if (sparsity_eps <= 0.0) throw Error(ErrorKind::config, "sparsity_eps must be positive");
  if (robustness_noise_std < 0.0)
    throw Error(ErrorKind::config, "robustness noise_std must be non-negative");
}

Dataset build_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset data;
  data.train.reserve(spec.count);
  for (size_t i = 0; i < spec.count; ++i) data.train.push_back(generate_scene(spec, i));
  data.val.reserve(spec.val_count);
  for (size_t i = 0; i < spec.val_count; ++i)
    data.val.push_back(generate_scene(spec, spec.count + i));
  return data;
}

std::vector<Scene> load_scenes(const std::filesystem::path& manifest_path) {
  const auto pairs = io::load_manifest(manifest_path);
  const std::filesystem::path base = manifest_path.parent_path();
  std::vector<Scene> scenes;
  scenes.reserve(pairs.size());
  for (const auto& [image_rel, depth_rel] : pairs) {
    const std::filesystem::path image_rel_path(image_rel);
    const std::filesystem::path depth_rel_path(depth_rel);
    const std::filesystem::path image_path =
        image_rel_path.is_absolute() ? image_rel_path : base / image_rel_path;
    const std::filesystem::path depth_path =
        depth_rel_path.is_absolute() ? depth_rel_path : base / depth_rel_path;
    scenes.push_back(load_pair(image_path, depth_path));
  }
  return scenes;
}

Optimizer::Optimizer(const TrainConfig& config, std::vector<NamedParam> params)
    : config_(config), params_(std::move(params)) {
  if (config_.optimizer == OptimizerKind::adam) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const NamedParam& p : params_) {
      m_.emplace_back(p.tensor.numel(), 0.0);
      v_.emplace_back(p.tensor.numel(), 0.0);
    }
  }
}

void Optimizer::step() {
  ++t_;
  const double lr = config_.learning_rate;
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& t = params_[pi].tensor;
    if (!t.has_grad()) continue;  // unreachable parameter this step
    const std::vector<double>& g = t.grad();
    std::vector<double>& x = t.values();
    if (config_.optimizer == OptimizerKind::sgd) {
      for (size_t i = 0; i < x.size(); ++i) x[i] -= lr * g[i];
      continue;
    }
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    std::vector<double>& m = m_[pi];
    std::vector<double>& v = v_[pi];
    for (size_t i = 0; i < x.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / corr1;
      const double vhat = v[i] / corr2;
      x[i] -= lr * mhat / (std::sqrt(vhat) + config_.adam_eps);
    }
  }
}

namespace {

// Independent derived streams so adding one consumer never shifts another.
constexpr uint64_t kShuffleStream = 1;
constexpr uint64_t kRobustnessStream = 2;

double l1_loss_value(const Tensor& pred, const Tensor& gt) {
  double total = 0.0;
  for (size_t i = 0; i < pred.numel(); ++i)
    total += std::abs(pred.values()[i] - gt.values()[i]);
  return total / static_cast<double>(pred.numel());
}

struct EpochDiagnostics {
  std::vector<AttentionRecord> records;
  std::vector<Tensor> token_inputs;
};

EpochDiagnostics run_diagnostics(const std::vector<Scene>& diag_scenes,
                                 const ModelParams& params, const ModelConfig& config) {
  EpochDiagnostics d;
  for (const Scene& scene : diag_scenes) {
    Tensor tokens = patch_embed(scene.image, params, config);
    EncoderOutput enc = encoder_forward(tokens, params, config, /*capture=*/true);
    for (AttentionRecord& rec : enc.records) d.records.push_back(std::move(rec));
    d.token_inputs.push_back(std::move(tokens));
  }
  return d;
}

}  // namespace

TrainResult train(const ModelConfig& config, const Dataset& data, const TrainConfig& tc) {
  config.validate();
  tc.validate();
  if (data.train.empty())
    throw Error(ErrorKind::invalid_argument, "train: training set is empty");
  if (data.val.empty())
    throw Error(ErrorKind::invalid_argument, "train: validation set is empty");

  TrainResult result;
  result.config = config;
  ModelParams params = init_params(config, tc.seed);
  Optimizer optimizer(tc, named_params(params));
  Rng shuffle_rng(combine_seed(tc.seed, kShuffleStream));

  const size_t diag_count = std::min(tc.diagnostic_batch_size, data.val.size());
  const std::vector<Scene> diag_scenes(data.val.begin(),
                                       data.val.begin() + static_cast<ptrdiff_t>(diag_count));

  double best_abs_rel = std::numeric_limits<double>::infinity();

  std::vector<size_t> order(data.train.size());
  for (size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    shuffle_rng.shuffle(order);

    // Per-image losses keyed by scene index, so the epoch mean is identical
    // no matter how the shuffle grouped the batches.
    std::vector<double> image_losses(data.train.size(), 0.0);
    for (size_t start = 0; start < order.size(); start += tc.batch_size) {
      const size_t batch_index = start / tc.batch_size;
      const size_t end = std::min(order.size(), start + tc.batch_size);
      try {
        Tape tape;
        TapeScope scope(tape);
        Tensor batch_loss;
        for (size_t k = start; k < end; ++k) {
          const Scene& scene = data.train[order[k]];
          ModelOutput out = model_forward(scene.image, params, config, /*capture=*/false);
          Tensor loss = ops::mean(ops::abs(ops::sub(out.depth, scene.depth)));
          image_losses[order[k]] = loss.values()[0];
          batch_loss = batch_loss.defined() ? ops::add(batch_loss, loss) : loss;
        }
        batch_loss = ops::scalar_mul(batch_loss, 1.0 / static_cast<double>(end - start));
        if (!std::isfinite(batch_loss.values()[0]))
          throw Error(ErrorKind::non_finite, "loss is not finite");
        tape.backward(batch_loss);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::non_finite)
          throw Error(ErrorKind::non_finite, "training aborted at epoch " +
                                                 std::to_string(epoch) + ", batch " +
                                                 std::to_string(batch_index) + ": " + e.what());
        throw;
      }
      optimizer.step();
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = std::accumulate(image_losses.begin(), image_losses.end(), 0.0) /
                     static_cast<double>(image_losses.size());

    double val_loss = 0.0;
    std::vector<DepthMetrics> per_image;
    per_image.reserve(data.val.size());
    for (const Scene& scene : data.val) {
      ModelOutput out = model_forward(scene.image, params, config, /*capture=*/false);
      val_loss += l1_loss_value(out.depth, scene.depth);
      per_image.push_back(compute_metrics(out.depth, scene.depth));
    }
    log.val_loss = val_loss / static_cast<double>(data.val.size());
    log.val_metrics = mean_metrics(per_image);

    if (diag_count > 0) {
      EpochDiagnostics diag = run_diagnostics(diag_scenes, params, config);
      RobustnessSpec robustness;
      robustness.noise_std = tc.robustness_noise_std;
      robustness.num_draws = tc.robustness_draws;
      robustness.seed = combine_seed(combine_seed(tc.seed, kRobustnessStream), epoch);
      robustness.inputs = std::move(diag.token_inputs);
      robustness.eval_records = [&params, &config](const Tensor& tokens) {
        return encoder_forward(tokens, params, config, /*capture=*/true).records;
      };
      log.indicators = collect_epoch(diag.records, epoch, tc.sparsity_eps, robustness);
    }

    if (log.val_metrics.abs_rel < best_abs_rel) {
      best_abs_rel = log.val_metrics.abs_rel;
      result.best_epoch = epoch;
      result.best_params = clone_params(params);
    }
    result.logs.push_back(std::move(log));
  }

  result.final_params = std::move(params);
  return result;
}

DepthMetrics evaluate(const ModelParams& params, const ModelConfig& config,
                      const std::vector<Scene>& scenes) {
  return evaluate_with(
      [&](const Scene& scene) {
        return model_forward(scene.image, params, config, /*capture=*/false).depth;
      },
      scenes);
}

DepthMetrics evaluate_with(const std::function<Tensor(const Scene&)>& predict,
                           const std::vector<Scene>& scenes) {
  if (scenes.empty()) throw Error(ErrorKind::invalid_argument, "evaluate: no scenes");
  std::vector<DepthMetrics> per_image;
  per_image.reserve(scenes.size());
  for (const Scene& scene : scenes) per_image.push_back(compute_metrics(predict(scene), scene.depth));
  return mean_metrics(per_image);
}

std::vector<LayerwiseRow> diagnose_layerwise(const ModelParams& params,
                                             const ModelConfig& config,
                                             const std::vector<Scene>& scenes,
                                             double sparsity_eps, double noise_std,
                                             size_t draws, uint64_t seed) {
  config.validate();
  if (scenes.empty())
    throw Error(ErrorKind::invalid_argument, "diagnose: no scenes in the diagnostic batch");

  // Per (layer, head): the per-scene value list of every indicator.
  struct Distributions {
    std::vector<double> alignment, align_p05, align_p50, align_p95;
    std::vector<double> selectivity_v, robustness_v;
  };
  std::map<std::pair<size_t, size_t>, Distributions> dists;

  for (size_t s = 0; s < scenes.size(); ++s) {
    Tensor tokens = patch_embed(scenes[s].image, params, config);
    EncoderOutput enc = encoder_forward(tokens, params, config, /*capture=*/true);

    std::map<std::pair<size_t, size_t>, double> scene_robustness;
    const uint64_t scene_seed = combine_seed(seed, s);
    for (size_t d = 0; d < draws; ++d) {
      Tensor noisy = perturbed_copy(tokens, noise_std, combine_seed(scene_seed, d));
      EncoderOutput renc = encoder_forward(noisy, params, config, /*capture=*/true);
      for (size_t r = 0; r < enc.records.size(); ++r) {
        const AttentionRecord& clean = enc.records[r];
        scene_robustness[{clean.layer_index, clean.head_index}] +=
            frobenius_distance(clean.attention, renc.records[r].attention);
      }
    }

    for (const AttentionRecord& rec : enc.records) {
      Distributions& d = dists[{rec.layer_index, rec.head_index}];
      d.alignment.push_back(angular_alignment(rec));
      std::vector<double> pairs = angular_alignment_pairs(rec);
      d.align_p05.push_back(quantile(pairs, 0.05));
      d.align_p50.push_back(quantile(pairs, 0.50));
      d.align_p95.push_back(quantile(std::move(pairs), 0.95));
      d.selectivity_v.push_back(selectivity(rec.attention));
      if (draws > 0) {
        d.robustness_v.push_back(scene_robustness[{rec.layer_index, rec.head_index}] /
                                 static_cast<double>(draws));
      }
    }
  }

  std::vector<LayerwiseRow> rows;
  auto summarize = [&rows](size_t layer, size_t head, const std::string& indicator,
                           std::vector<double> values) {
    LayerwiseRow row;
    row.layer = layer;
    row.head = head;
    row.indicator = indicator;
    row.min = quantile(values, 0.0);
    row.q25 = quantile(values, 0.25);
    row.median = quantile(values, 0.5);
    row.q75 = quantile(values, 0.75);
    row.max = quantile(std::move(values), 1.0);
    rows.push_back(std::move(row));
  };

  for (auto& [key, d] : dists) {
    const auto [layer, head] = key;
    if (config.attention.mechanism == Mechanism::svda) {
      const Tensor& sigma = params.blocks.at(layer).heads.at(head).sigma;
      const double h = spectral_entropy(sigma);
      const size_t n = scenes.size();
      summarize(layer, head, "entropy", std::vector<double>(n, h));
      summarize(layer, head, "effective_rank", std::vector<double>(n, std::exp(h)));
    }
    summarize(layer, head, "alignment", std::move(d.alignment));
    summarize(layer, head, "alignment_p05", std::move(d.align_p05));
    summarize(layer, head, "alignment_p50", std::move(d.align_p50));
    summarize(layer, head, "alignment_p95", std::move(d.align_p95));
    summarize(layer, head, "selectivity", std::move(d.selectivity_v));
    if (config.attention.mechanism == Mechanism::svda) {
      const Tensor& sigma = params.blocks.at(layer).heads.at(head).sigma;
      summarize(layer, head, "sparsity",
                std::vector<double>(scenes.size(), spectral_sparsity(sigma, sparsity_eps)));
    }
    if (!d.robustness_v.empty()) summarize(layer, head, "robustness", std::move(d.robustness_v));
  }
  return rows;
}

std::vector<TrendRow> indicator_trends(const std::vector<EpochLog>& logs, Mechanism mechanism,
                                       size_t window) {
  if (logs.empty()) return {};
  const size_t total = logs.size();
  const size_t w = std::min(window, total);
  std::vector<TrendRow> rows;
  for (IndicatorName name :
       {IndicatorName::entropy, IndicatorName::effective_rank, IndicatorName::alignment,
        IndicatorName::selectivity, IndicatorName::sparsity, IndicatorName::robustness}) {
    double first_sum = 0.0, last_sum = 0.0;
    size_t first_n = 0, last_n = 0;
    for (const EpochLog& log : logs) {
      for (const IndicatorSample& s : log.indicators) {
        if (s.name != name) continue;
        if (log.epoch <= w) {
          first_sum += s.value;
          ++first_n;
        }
        if (log.epoch > total - w) {
          last_sum += s.value;
          ++last_n;
        }
      }
    }
    if (first_n == 0 || last_n == 0) continue;  // indicator absent from this run
    TrendRow row;
    row.mechanism = mechanism;
    row.indicator = name;
    row.first_mean = first_sum / static_cast<double>(first_n);
    row.last_mean = last_sum / static_cast<double>(last_n);
    row.delta = row.last_mean - row.first_mean;
    rows.push_back(row);
  }
  return rows;
}

CompareResult compare(const ModelConfig& base_config, const Dataset& data,
                      const TrainConfig& tc) {
  CompareResult result;
  ModelConfig svda_config = base_config;
  svda_config.attention.mechanism = Mechanism::svda;
  result.svda_run = train(svda_config, data, tc);
  ModelConfig baseline_config = base_config;
  baseline_config.attention.mechanism = Mechanism::baseline;
  result.baseline_run = train(baseline_config, data, tc);
  result.trends = indicator_trends(result.svda_run.logs, Mechanism::svda);
  for (TrendRow row : indicator_trends(result.baseline_run.logs, Mechanism::baseline))
    result.trends.push_back(row);
  return result;
}

}  // namespace svda
