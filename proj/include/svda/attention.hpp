#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svda/ops.hpp"
#include "svda/tensor.hpp"

namespace svda {

enum class Mechanism { svda, baseline };

const char* to_string(Mechanism m);
Mechanism mechanism_from_string(const std::string& s);

struct AttentionConfig {
  size_t d_model = 64;
  size_t num_heads = 4;
  size_t d_k = 16;
  Mechanism mechanism = Mechanism::svda;
  bool capture_diagnostics = false;

  void validate() const;
};

/// One head's projection weights. sigma is the learnable diagonal spectral
/// vector; it is only defined() for the svda mechanism.
struct HeadParams {
  Tensor w_q;  // [d_model x d_k]
  Tensor w_k;
  Tensor w_v;
  Tensor sigma;  // [d_k], svda only
};

/// Detached per-head snapshot taken during a capture-enabled forward pass.
struct AttentionRecord {
  size_t layer_index = 0;
  size_t head_index = 0;
  Tensor q_normalized;  // [n x d_k], unit rows
  Tensor k_normalized;  // [n x d_k], unit rows
  std::optional<Tensor> sigma_snapshot;  // absent for baseline
  Tensor attention;     // [n x n], rows sum to 1
};

struct HeadOutput {
  Tensor y;  // [n x d_k]
  std::optional<AttentionRecord> record;
};

/// A = softmax(Qn diag(sigma) Kn^T / sqrt(d_k)) with Qn, Kn row-normalized
/// projections; y = A (x W_v).
HeadOutput svda_head_forward(const Tensor& x, const HeadParams& p, size_t d_k, bool capture,
                             size_t layer_index = 0, size_t head_index = 0);

/// Standard scaled dot-product head: A = softmax((x W_q)(x W_k)^T / sqrt(d_k)).
/// When capturing, Q/K snapshots are normalized post hoc so alignment stays
/// comparable across mechanisms; the attention path itself is unnormalized.
HeadOutput baseline_head_forward(const Tensor& x, const HeadParams& p, size_t d_k, bool capture,
                                 size_t layer_index = 0, size_t head_index = 0);

struct MultiHeadOutput {
  Tensor y;  // [n x d_model]
  std::vector<AttentionRecord> records;
};

/// Concatenates per-head outputs in head order and projects by w_o.
MultiHeadOutput multi_head_forward(const Tensor& x, const std::vector<HeadParams>& heads,
                                   const Tensor& w_o, const AttentionConfig& config,
                                   size_t layer_index = 0);

/// Learnable scalars in one multi-head block for the given mechanism.
/// Projections carry no biases, so svda exceeds baseline by exactly
/// num_heads * d_k (the sigma entries).
size_t attention_param_count(const AttentionConfig& config);
size_t attention_param_delta(const AttentionConfig& config);

}  // namespace svda
