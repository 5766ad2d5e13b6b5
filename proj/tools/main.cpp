#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "svda/checkpoint.hpp"
#include "svda/config.hpp"
#include "svda/csv.hpp"
#include "svda/harness.hpp"
#include "svda/io.hpp"

namespace {

using namespace svda;

RunConfig config_or_default(const std::string& config_path) {
  if (config_path.empty()) return RunConfig{};
  return load_run_config(config_path);
}

std::filesystem::path resolve_out(const std::string& out_override,
                                  const std::filesystem::path& fallback) {
  const std::filesystem::path out =
      out_override.empty() ? fallback : std::filesystem::path(out_override);
  std::filesystem::create_directories(out);
  return out;
}

std::string scene_stem(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05zu", index);
  return buf;
}

int cmd_gen(const std::string& config_path, const std::string& out_override) {
  const RunConfig config = config_or_default(config_path);
  const std::filesystem::path out = resolve_out(out_override, config.output_dir);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (size_t i = 0; i < config.data.count; ++i) {
    const Scene scene = generate_scene(config.data, i);
    const std::string image_name = scene_stem(i) + "_image.tnsr";
    const std::string depth_name = scene_stem(i) + "_depth.tnsr";
    save_pair(scene, out / image_name, out / depth_name);
    pairs.emplace_back(image_name, depth_name);
  }
  io::save_manifest(out / "manifest.tsv", pairs);
  std::cout << "wrote " << config.data.count << " scene pairs and manifest.tsv to "
            << out.string() << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_override) {
  const RunConfig config = config_or_default(config_path);
  const std::filesystem::path out = resolve_out(out_override, config.output_dir);
  const Dataset data = build_dataset(config.data);
  const TrainResult result = train(config.model, data, config.train);
  for (const EpochLog& log : result.logs)
    std::cout << "epoch " << log.epoch << "/" << config.train.epochs << "  train "
              << csv::format_double(log.train_loss) << "  val "
              << csv::format_double(log.val_loss) << "  abs_rel "
              << csv::format_double(log.val_metrics.abs_rel) << "\n";
  save_checkpoint(out / "checkpoint.svda", result.best_params, result.config);
  csv::write_epochs(out / "epochs.csv", result.logs);
  csv::write_indicators(out / "indicators.csv", result.logs);
  std::cout << "best epoch " << result.best_epoch << "; checkpoint and CSVs written to "
            << out.string() << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& manifest_path,
             const std::string& out_override) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const std::vector<Scene> scenes = load_scenes(manifest_path);
  const DepthMetrics m = evaluate(ckpt.params, ckpt.config, scenes);
  const std::filesystem::path out = resolve_out(out_override, ".");
  const std::string mechanism = to_string(ckpt.config.attention.mechanism);
  csv::write_metrics(out / "metrics.csv", {{mechanism, m}});
  std::cout << "mechanism abs_rel sq_rel rmse rmse_log srmse_log delta1\n"
            << mechanism << ' ' << csv::format_double(m.abs_rel) << ' '
            << csv::format_double(m.sq_rel) << ' ' << csv::format_double(m.rmse) << ' '
            << csv::format_double(m.rmse_log) << ' ' << csv::format_double(m.srmse_log) << ' '
            << csv::format_double(m.delta1) << "\n";
  return 0;
}

int cmd_diagnose(const std::string& checkpoint_path, const std::string& manifest_path,
                 double eps, double noise_std, size_t draws, const std::string& out_override) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const std::vector<Scene> scenes = load_scenes(manifest_path);
  const std::vector<LayerwiseRow> rows =
      diagnose_layerwise(ckpt.params, ckpt.config, scenes, eps, noise_std, draws, /*seed=*/0);
  const std::filesystem::path out = resolve_out(out_override, ".");
  csv::write_layerwise(out / "layerwise.csv", rows);

  ModelConfig svda_config = ckpt.config;
  svda_config.attention.mechanism = Mechanism::svda;
  ModelConfig baseline_config = ckpt.config;
  baseline_config.attention.mechanism = Mechanism::baseline;
  const size_t with_sigma = model_param_count(svda_config);
  const size_t without = model_param_count(baseline_config);
  const size_t delta = with_sigma - without;
  const double pct = 100.0 * static_cast<double>(delta) / static_cast<double>(without);
  char pct_buf[32];
  std::snprintf(pct_buf, sizeof(pct_buf), "%.4f", pct);
  std::cout << "parameter overhead: sigma adds " << delta << " parameters on a baseline of "
            << without << " (+" << pct_buf << "%)\n";
  std::cout << "layerwise.csv written to " << out.string() << "\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_override) {
  const RunConfig config = config_or_default(config_path);
  const std::filesystem::path out = resolve_out(out_override, config.output_dir);
  const Dataset data = build_dataset(config.data);
  const CompareResult result = compare(config.model, data, config.train);
  csv::write_compare(out / "compare.csv", result);
  csv::write_trends(out / "trends.csv", result.trends);
  for (const TrendRow& row : result.trends)
    std::cout << to_string(row.mechanism) << ' ' << to_string(row.indicator) << "  first "
              << csv::format_double(row.first_mean) << "  last "
              << csv::format_double(row.last_mean) << "  delta "
              << csv::format_double(row.delta) << "\n";
  std::cout << "compare.csv and trends.csv written to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic toy depth transformer with spectral attention diagnostics"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, manifest_path, out_override;
  double eps = 0.01;
  double noise_std = 0.01;
  size_t draws = 8;

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset and manifest");
  gen->add_option("--config", config_path, "JSON run configuration");
  gen->add_option("--out", out_override, "output directory (overrides the configuration)");

  CLI::App* train_cmd = app.add_subcommand("train", "train and write checkpoint plus CSV logs");
  train_cmd->add_option("--config", config_path, "JSON run configuration");
  train_cmd->add_option("--out", out_override, "output directory (overrides the configuration)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a manifest");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval_cmd->add_option("--manifest", manifest_path, "dataset manifest")->required();
  eval_cmd->add_option("--out", out_override, "output directory");

  CLI::App* diagnose =
      app.add_subcommand("diagnose", "export per-layer indicator distributions");
  diagnose->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  diagnose->add_option("--manifest", manifest_path, "dataset manifest")->required();
  diagnose->add_option("--eps", eps, "sparsity threshold");
  diagnose->add_option("--noise-std", noise_std, "robustness perturbation scale");
  diagnose->add_option("--draws", draws, "robustness perturbation draws");
  diagnose->add_option("--out", out_override, "output directory");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "train both mechanisms and export trend CSVs");
  compare_cmd->add_option("--config", config_path, "JSON run configuration");
  compare_cmd->add_option("--out", out_override, "output directory (overrides the configuration)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_override);
    if (train_cmd->parsed()) return cmd_train(config_path, out_override);
    if (eval_cmd->parsed()) return cmd_eval(checkpoint_path, manifest_path, out_override);
    if (diagnose->parsed())
      return cmd_diagnose(checkpoint_path, manifest_path, eps, noise_std, draws, out_override);
    if (compare_cmd->parsed()) return cmd_compare(config_path, out_override);
  } catch (const svda::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
