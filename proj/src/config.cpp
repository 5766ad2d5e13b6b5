#include "svda/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace svda {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& section, const std::string& key) {
  throw Error(ErrorKind::config, "unknown key '" + key + "' in " + section);
}

size_t get_count(const json& v, const std::string& section, const std::string& key) {
  if (!v.is_number_integer() || v.get<int64_t>() < 0)
    throw Error(ErrorKind::config, section + "." + key + " must be a non-negative integer");
  return static_cast<size_t>(v.get<int64_t>());
}

double get_real(const json& v, const std::string& section, const std::string& key) {
  if (!v.is_number())
    throw Error(ErrorKind::config, section + "." + key + " must be a number");
  return v.get<double>();
}

uint64_t get_seed(const json& v, const std::string& section, const std::string& key) {
  if (!v.is_number_integer() || v.get<int64_t>() < 0)
    throw Error(ErrorKind::config, section + "." + key + " must be a non-negative integer");
  return static_cast<uint64_t>(v.get<int64_t>());
}

std::string get_string(const json& v, const std::string& section, const std::string& key) {
  if (!v.is_string())
    throw Error(ErrorKind::config, section + "." + key + " must be a string");
  return v.get<std::string>();
}

void parse_model(const json& obj, ModelConfig& model) {
  for (const auto& [key, value] : obj.items()) {
    if (key == "image_h") model.image_h = get_count(value, "model", key);
    else if (key == "image_w") model.image_w = get_count(value, "model", key);
    else if (key == "channels") model.channels = get_count(value, "model", key);
    else if (key == "patch_size") model.patch_size = get_count(value, "model", key);
    else if (key == "d_model") model.d_model = get_count(value, "model", key);
    else if (key == "num_heads") model.attention.num_heads = get_count(value, "model", key);
    else if (key == "d_k") model.attention.d_k = get_count(value, "model", key);
    else if (key == "num_layers") model.num_layers = get_count(value, "model", key);
    else if (key == "mlp_hidden") model.mlp_hidden = get_count(value, "model", key);
    else if (key == "mechanism")
      model.attention.mechanism = mechanism_from_string(get_string(value, "model", key));
    else bad_key("model", key);
  }
  model.attention.d_model = model.d_model;
}

void parse_train(const json& obj, TrainConfig& train) {
  for (const auto& [key, value] : obj.items()) {
    if (key == "epochs") train.epochs = get_count(value, "train", key);
    else if (key == "batch_size") train.batch_size = get_count(value, "train", key);
    else if (key == "learning_rate") train.learning_rate = get_real(value, "train", key);
    else if (key == "optimizer")
      train.optimizer = optimizer_from_string(get_string(value, "train", key));
    else if (key == "adam_beta1") train.adam_beta1 = get_real(value, "train", key);
    else if (key == "adam_beta2") train.adam_beta2 = get_real(value, "train", key);
    else if (key == "adam_eps") train.adam_eps = get_real(value, "train", key);
    else if (key == "seed") train.seed = get_seed(value, "train", key);
    else if (key == "diagnostic_batch_size")
      train.diagnostic_batch_size = get_count(value, "train", key);
    else if (key == "sparsity_eps") train.sparsity_eps = get_real(value, "train", key);
    else if (key == "robustness_noise_std")
      train.robustness_noise_std = get_real(value, "train", key);
    else if (key == "robustness_draws") train.robustness_draws = get_count(value, "train", key);
    else bad_key("train", key);
  }
}

void parse_data(const json& obj, DatasetSpec& data) {
  for (const auto& [key, value] : obj.items()) {
    if (key == "count") data.count = get_count(value, "data", key);
    else if (key == "val_count") data.val_count = get_count(value, "data", key);
    else if (key == "image_h") data.image_h = get_count(value, "data", key);
    else if (key == "image_w") data.image_w = get_count(value, "data", key);
    else if (key == "num_shapes_min") data.num_shapes_min = get_count(value, "data", key);
    else if (key == "num_shapes_max") data.num_shapes_max = get_count(value, "data", key);
    else if (key == "depth_levels_min") data.depth_levels_min = get_count(value, "data", key);
    else if (key == "depth_levels_max") data.depth_levels_max = get_count(value, "data", key);
    else if (key == "noise_std") data.noise_std = get_real(value, "data", key);
    else if (key == "seed") data.seed = get_seed(value, "data", key);
    else bad_key("data", key);
  }
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
  data.validate();
  if (model.image_h != data.image_h || model.image_w != data.image_w)
    throw Error(ErrorKind::config,
                "model expects " + std::to_string(model.image_h) + "x" +
                    std::to_string(model.image_w) + " images but data generates " +
                    std::to_string(data.image_h) + "x" + std::to_string(data.image_w));
  if (model.channels != 1)
    throw Error(ErrorKind::config, "generated scenes are single-channel; model.channels must be 1");
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::format, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::format, "config root must be a JSON object");

  RunConfig config;
  for (const auto& [key, value] : root.items()) {
    if (key == "model" || key == "train" || key == "data") {
      if (!value.is_object())
        throw Error(ErrorKind::config, "'" + key + "' must be an object");
      if (key == "model") parse_model(value, config.model);
      else if (key == "train") parse_train(value, config.train);
      else parse_data(value, config.data);
    } else if (key == "output_dir") {
      config.output_dir = get_string(value, "config", key);
    } else {
      bad_key("config", key);
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path.string() + " for reading");
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_run_config(buffer.str());
}

}  // namespace svda
