#pragma once

#include <filesystem>
#include <string>

#include "svda/datagen.hpp"
#include "svda/harness.hpp"
#include "svda/model.hpp"

namespace svda {

/// One run's complete configuration. Defaults are the toy setup; a JSON file
/// overrides them field by field, and unknown keys are errors rather than
/// silently ignored.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DatasetSpec data;
  std::filesystem::path output_dir = "out";

  void validate() const;  // nested invariants plus model/data shape agreement
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace svda
