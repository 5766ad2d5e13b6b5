#include "svda/model.hpp"

#include <cmath>

#include "svda/rng.hpp"

namespace svda {

void ModelConfig::validate() const {
  if (image_h == 0 || image_w == 0 || channels == 0 || patch_size == 0) {
    throw Error(ErrorKind::config, "image and patch dimensions must be positive");
  }
  if (image_h % patch_size != 0 || image_w % patch_size != 0) {
    throw Error(ErrorKind::config, "patch size " + std::to_string(patch_size) +
                                       " must divide image " + std::to_string(image_h) + "x" +
                                       std::to_string(image_w));
  }
  attention.validate();
  if (attention.d_model != d_model) {
    throw Error(ErrorKind::config, "attention d_model " + std::to_string(attention.d_model) +
                                       " must equal model d_model " + std::to_string(d_model));
  }
  if (mlp_hidden == 0) throw Error(ErrorKind::config, "mlp_hidden must be positive");
}

namespace {

Tensor init_weight(Rng& rng, size_t rows, size_t cols, size_t fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros({rows, cols}, true);
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor const_vector(size_t n, double value) { return Tensor::full({n}, value, true); }

}  // namespace

ModelParams init_params(const ModelConfig& config, uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ModelParams p;
  p.patch_proj = init_weight(rng, config.patch_dim(), config.d_model, config.patch_dim());
  p.patch_bias = const_vector(config.d_model, 0.0);
  p.pos_embed = init_weight(rng, config.tokens(), config.d_model, config.d_model);
  for (size_t l = 0; l < config.num_layers; ++l) {
    BlockParams b;
    b.ln1_gamma = const_vector(config.d_model, 1.0);
    b.ln1_beta = const_vector(config.d_model, 0.0);
    for (size_t h = 0; h < config.attention.num_heads; ++h) {
      HeadParams head;
      head.w_q = init_weight(rng, config.d_model, config.attention.d_k, config.d_model);
      head.w_k = init_weight(rng, config.d_model, config.attention.d_k, config.d_model);
      head.w_v = init_weight(rng, config.d_model, config.attention.d_k, config.d_model);
      if (config.attention.mechanism == Mechanism::svda) {
        head.sigma = const_vector(config.attention.d_k, 1.0);
      }
      b.heads.push_back(std::move(head));
    }
    b.w_o = init_weight(rng, config.d_model, config.d_model, config.d_model);
    b.ln2_gamma = const_vector(config.d_model, 1.0);
    b.ln2_beta = const_vector(config.d_model, 0.0);
    b.mlp_w1 = init_weight(rng, config.d_model, config.mlp_hidden, config.d_model);
    b.mlp_b1 = const_vector(config.mlp_hidden, 0.0);
    b.mlp_w2 = init_weight(rng, config.mlp_hidden, config.d_model, config.mlp_hidden);
    b.mlp_b2 = const_vector(config.d_model, 0.0);
    p.blocks.push_back(std::move(b));
  }
  p.head_w = init_weight(rng, config.d_model, config.patch_size * config.patch_size,
                         config.d_model);
  p.head_b = const_vector(config.patch_size * config.patch_size, 0.0);
  return p;
}

ModelParams clone_params(const ModelParams& params) {
  ModelParams out;
  auto copy = [](const Tensor& t) {
    Tensor c = t.detached_copy();
    c.set_requires_grad(t.requires_grad());
    return c;
  };
  out.patch_proj = copy(params.patch_proj);
  out.patch_bias = copy(params.patch_bias);
  out.pos_embed = copy(params.pos_embed);
  for (const BlockParams& b : params.blocks) {
    BlockParams nb;
    nb.ln1_gamma = copy(b.ln1_gamma);
    nb.ln1_beta = copy(b.ln1_beta);
    for (const HeadParams& h : b.heads) {
      HeadParams nh;
      nh.w_q = copy(h.w_q);
      nh.w_k = copy(h.w_k);
      nh.w_v = copy(h.w_v);
      if (h.sigma.defined()) nh.sigma = copy(h.sigma);
      nb.heads.push_back(std::move(nh));
    }
    nb.w_o = copy(b.w_o);
    nb.ln2_gamma = copy(b.ln2_gamma);
    nb.ln2_beta = copy(b.ln2_beta);
    nb.mlp_w1 = copy(b.mlp_w1);
    nb.mlp_b1 = copy(b.mlp_b1);
    nb.mlp_w2 = copy(b.mlp_w2);
    nb.mlp_b2 = copy(b.mlp_b2);
    out.blocks.push_back(std::move(nb));
  }
  out.head_w = copy(params.head_w);
  out.head_b = copy(params.head_b);
  return out;
}

std::vector<NamedParam> named_params(ModelParams& params) {
  std::vector<NamedParam> out;
  out.push_back({"patch_proj", params.patch_proj});
  out.push_back({"patch_bias", params.patch_bias});
  out.push_back({"pos_embed", params.pos_embed});
  for (size_t l = 0; l < params.blocks.size(); ++l) {
    BlockParams& b = params.blocks[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    out.push_back({prefix + "ln1_gamma", b.ln1_gamma});
    out.push_back({prefix + "ln1_beta", b.ln1_beta});
    for (size_t h = 0; h < b.heads.size(); ++h) {
      const std::string hp = prefix + "head" + std::to_string(h) + ".";
      out.push_back({hp + "w_q", b.heads[h].w_q});
      out.push_back({hp + "w_k", b.heads[h].w_k});
      out.push_back({hp + "w_v", b.heads[h].w_v});
      if (b.heads[h].sigma.defined()) out.push_back({hp + "sigma", b.heads[h].sigma});
    }
    out.push_back({prefix + "w_o", b.w_o});
    out.push_back({prefix + "ln2_gamma", b.ln2_gamma});
    out.push_back({prefix + "ln2_beta", b.ln2_beta});
    out.push_back({prefix + "mlp_w1", b.mlp_w1});
    out.push_back({prefix + "mlp_b1", b.mlp_b1});
    out.push_back({prefix + "mlp_w2", b.mlp_w2});
    out.push_back({prefix + "mlp_b2", b.mlp_b2});
  }
  out.push_back({"head_w", params.head_w});
  out.push_back({"head_b", params.head_b});
  return out;
}

size_t model_param_count(const ModelConfig& config) {
  size_t count = config.patch_dim() * config.d_model + config.d_model  // patch projection
                 + config.tokens() * config.d_model;                   // positional embeddings
  const size_t per_block = 2 * config.d_model                          // ln1
                           + attention_param_count(config.attention)
                           + 2 * config.d_model                        // ln2
                           + config.d_model * config.mlp_hidden + config.mlp_hidden
                           + config.mlp_hidden * config.d_model + config.d_model;
  count += config.num_layers * per_block;
  count += config.d_model * config.patch_size * config.patch_size +
           config.patch_size * config.patch_size;  // depth head
  return count;
}

namespace {

// [C x H x W] image -> [tokens x patch_dim] rows, channel-major within a patch.
Tensor extract_patches(const Tensor& image, const ModelConfig& config) {
  const auto& shape = image.shape();
  if (shape.size() != 3 || shape[0] != config.channels || shape[1] != config.image_h ||
      shape[2] != config.image_w) {
    throw Error(ErrorKind::shape_mismatch,
                "patch_embed: image " + shape_to_string(shape) + " does not match configured " +
                    std::to_string(config.channels) + "x" + std::to_string(config.image_h) + "x" +
                    std::to_string(config.image_w));
  }
  const size_t P = config.patch_size;
  const size_t gw = config.grid_w();
  Tensor out = Tensor::zeros({config.tokens(), config.patch_dim()});
  for (size_t pr = 0; pr < config.grid_h(); ++pr)
    for (size_t pc = 0; pc < gw; ++pc) {
      const size_t t = pr * gw + pc;
      for (size_t c = 0; c < config.channels; ++c)
        for (size_t r = 0; r < P; ++r)
          for (size_t col = 0; col < P; ++col) {
            const size_t src = c * config.image_h * config.image_w +
                               (pr * P + r) * config.image_w + pc * P + col;
            out.values()[t * config.patch_dim() + c * P * P + r * P + col] = image.values()[src];
          }
    }
  return out;
}

}  // namespace

Tensor patch_embed(const Tensor& image, const ModelParams& params, const ModelConfig& config) {
  config.validate();
  Tensor patches = extract_patches(image, config);
  Tensor tokens = ops::broadcast_add_row(ops::matmul(patches, params.patch_proj),
                                         params.patch_bias);
  return ops::add(tokens, params.pos_embed);
}

EncoderOutput encoder_forward(const Tensor& tokens, const ModelParams& params,
                              const ModelConfig& config, bool capture) {
  AttentionConfig attn_cfg = config.attention;
  attn_cfg.capture_diagnostics = capture;
  EncoderOutput out;
  Tensor x = tokens;
  for (size_t l = 0; l < params.blocks.size(); ++l) {
    const BlockParams& b = params.blocks[l];
    Tensor h = ops::layer_norm_rows(x, b.ln1_gamma, b.ln1_beta);
    MultiHeadOutput mha = multi_head_forward(h, b.heads, b.w_o, attn_cfg, l);
    x = ops::add(x, mha.y);
    for (AttentionRecord& rec : mha.records) out.records.push_back(std::move(rec));
    Tensor h2 = ops::layer_norm_rows(x, b.ln2_gamma, b.ln2_beta);
    Tensor m = ops::broadcast_add_row(ops::matmul(h2, b.mlp_w1), b.mlp_b1);
    m = ops::broadcast_add_row(ops::matmul(ops::gelu(m), b.mlp_w2), b.mlp_b2);
    x = ops::add(x, m);
  }
  out.tokens = x;
  return out;
}

Tensor depth_head(const Tensor& tokens, const ModelParams& params, const ModelConfig& config) {
  Tensor per_patch = ops::broadcast_add_row(ops::matmul(tokens, params.head_w), params.head_b);
  Tensor grid = ops::patch_grid_to_image(per_patch, config.grid_h(), config.grid_w(),
                                         config.patch_size);
  return ops::sigmoid(grid);
}

ModelOutput model_forward(const Tensor& image, const ModelParams& params,
                          const ModelConfig& config, bool capture) {
  ModelOutput out;
  Tensor tokens = patch_embed(image, params, config);
  EncoderOutput enc = encoder_forward(tokens, params, config, capture);
  out.records = std::move(enc.records);
  out.depth = depth_head(enc.tokens, params, config);
  return out;
}

}  // namespace svda
