#pragma once

#include <string>
#include <utility>
#include <vector>

#include "svda/attention.hpp"
#include "svda/tensor.hpp"

namespace svda {

enum class HeadKind { nearest_upsample_linear };

struct ModelConfig {
  size_t image_h = 64;
  size_t image_w = 64;
  size_t channels = 1;
  size_t patch_size = 8;
  size_t d_model = 64;
  size_t num_layers = 4;
  size_t mlp_hidden = 256;
  AttentionConfig attention;
  HeadKind head = HeadKind::nearest_upsample_linear;

  size_t grid_h() const { return image_h / patch_size; }
  size_t grid_w() const { return image_w / patch_size; }
  size_t tokens() const { return grid_h() * grid_w(); }
  size_t patch_dim() const { return patch_size * patch_size * channels; }

  void validate() const;
};

/// Pre-norm encoder block: x += MHA(LN1(x)); x += MLP(LN2(x)).
struct BlockParams {
  Tensor ln1_gamma, ln1_beta;
  std::vector<HeadParams> heads;
  Tensor w_o;
  Tensor ln2_gamma, ln2_beta;
  Tensor mlp_w1, mlp_b1;  // [d_model x mlp_hidden], [mlp_hidden]
  Tensor mlp_w2, mlp_b2;  // [mlp_hidden x d_model], [d_model]
};

struct ModelParams {
  Tensor patch_proj;  // [patch_dim x d_model]
  Tensor patch_bias;  // [d_model]
  Tensor pos_embed;   // [tokens x d_model]
  std::vector<BlockParams> blocks;
  Tensor head_w;  // [d_model x patch_size^2]
  Tensor head_b;  // [patch_size^2]
};

/// Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases,
/// unit layer-norm gains, sigma all-ones (identity spectrum at start).
ModelParams init_params(const ModelConfig& config, uint64_t seed);

/// Deep value copy; the copy shares no storage with the source.
ModelParams clone_params(const ModelParams& params);

struct NamedParam {
  std::string name;
  Tensor tensor;
};

/// Every learnable tensor in fixed declaration order; the order defines the
/// checkpoint layout and the optimizer state indexing.
std::vector<NamedParam> named_params(ModelParams& params);

size_t model_param_count(const ModelConfig& config);

/// Non-overlapping patches flattened channel-major, projected, positional
/// embeddings added. Token order is row-major over the patch grid.
Tensor patch_embed(const Tensor& image, const ModelParams& params, const ModelConfig& config);

struct EncoderOutput {
  Tensor tokens;
  std::vector<AttentionRecord> records;
};

EncoderOutput encoder_forward(const Tensor& tokens, const ModelParams& params,
                              const ModelConfig& config, bool capture);

/// Per-token linear projection to patch_size^2 values placed on the patch
/// grid, then sigmoid into (0,1).
Tensor depth_head(const Tensor& tokens, const ModelParams& params, const ModelConfig& config);

struct ModelOutput {
  Tensor depth;  // [image_h x image_w]
  std::vector<AttentionRecord> records;
};

ModelOutput model_forward(const Tensor& image, const ModelParams& params,
                          const ModelConfig& config, bool capture);

}  // namespace svda
