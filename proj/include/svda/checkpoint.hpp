#pragma once

#include <filesystem>

#include "svda/model.hpp"

namespace svda {

/// Flat binary container: magic "SVDA", version u32, learnable-parameter
/// count u64, then named sections (name length u16, name bytes, element
/// count u64, 64-bit little-endian reals). The first section, "__config__",
/// encodes the model configuration; the rest follow named_params order.
/// Round-trips are bit-exact.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const ModelConfig& config);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace svda
