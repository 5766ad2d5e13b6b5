#include "svda/attention.hpp"

#include <cmath>

namespace svda {

const char* to_string(Mechanism m) {
  return m == Mechanism::svda ? "svda" : "baseline";
}

Mechanism mechanism_from_string(const std::string& s) {
  if (s == "svda") return Mechanism::svda;
  if (s == "baseline") return Mechanism::baseline;
  throw Error(ErrorKind::config, "unknown mechanism '" + s + "' (expected svda or baseline)");
}

void AttentionConfig::validate() const {
  if (d_model == 0 || num_heads == 0 || d_k == 0) {
    throw Error(ErrorKind::config, "attention dimensions must be positive");
  }
  if (num_heads * d_k != d_model) {
    throw Error(ErrorKind::config, "num_heads * d_k must equal d_model, got " +
                                       std::to_string(num_heads) + " * " + std::to_string(d_k) +
                                       " != " + std::to_string(d_model));
  }
}

namespace {

AttentionRecord make_record(size_t layer, size_t head, const Tensor& qn, const Tensor& kn,
                            const Tensor* sigma, const Tensor& attn) {
  AttentionRecord rec;
  rec.layer_index = layer;
  rec.head_index = head;
  rec.q_normalized = qn.detached_copy();
  rec.k_normalized = kn.detached_copy();
  if (sigma) rec.sigma_snapshot = sigma->detached_copy();
  rec.attention = attn.detached_copy();
  return rec;
}

}  // namespace

HeadOutput svda_head_forward(const Tensor& x, const HeadParams& p, size_t d_k, bool capture,
                             size_t layer_index, size_t head_index) {
  if (!p.sigma.defined()) {
    throw Error(ErrorKind::invalid_argument, "svda head requires a sigma vector");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));
  Tensor qn = ops::l2_normalize_rows(ops::matmul(x, p.w_q));
  Tensor kn = ops::l2_normalize_rows(ops::matmul(x, p.w_k));
  Tensor logits = ops::scalar_mul(ops::matmul_nt(ops::col_scale(qn, p.sigma), kn), scale);
  Tensor attn = ops::softmax_rows(logits);
  Tensor v = ops::matmul(x, p.w_v);
  HeadOutput out;
  out.y = ops::matmul(attn, v);
  if (capture) out.record = make_record(layer_index, head_index, qn, kn, &p.sigma, attn);
  return out;
}

HeadOutput baseline_head_forward(const Tensor& x, const HeadParams& p, size_t d_k, bool capture,
                                 size_t layer_index, size_t head_index) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));
  Tensor q = ops::matmul(x, p.w_q);
  Tensor k = ops::matmul(x, p.w_k);
  Tensor attn = ops::softmax_rows(ops::scalar_mul(ops::matmul_nt(q, k), scale));
  Tensor v = ops::matmul(x, p.w_v);
  HeadOutput out;
  out.y = ops::matmul(attn, v);
  if (capture) {
    Tensor qn = ops::l2_normalize_rows(q.detached_copy());
    Tensor kn = ops::l2_normalize_rows(k.detached_copy());
    out.record = make_record(layer_index, head_index, qn, kn, nullptr, attn);
  }
  return out;
}

MultiHeadOutput multi_head_forward(const Tensor& x, const std::vector<HeadParams>& heads,
                                   const Tensor& w_o, const AttentionConfig& config,
                                   size_t layer_index) {
  config.validate();
  if (heads.size() != config.num_heads) {
    throw Error(ErrorKind::invalid_argument,
                "expected " + std::to_string(config.num_heads) + " heads, got " +
                    std::to_string(heads.size()));
  }
  MultiHeadOutput out;
  std::vector<Tensor> parts;
  parts.reserve(heads.size());
  for (size_t h = 0; h < heads.size(); ++h) {
    HeadOutput ho = config.mechanism == Mechanism::svda
                        ? svda_head_forward(x, heads[h], config.d_k,
                                            config.capture_diagnostics, layer_index, h)
                        : baseline_head_forward(x, heads[h], config.d_k,
                                                config.capture_diagnostics, layer_index, h);
    parts.push_back(ho.y);
    if (ho.record) out.records.push_back(std::move(*ho.record));
  }
  out.y = ops::matmul(ops::concat_cols(parts), w_o);
  return out;
}

size_t attention_param_count(const AttentionConfig& config) {
  size_t count = config.num_heads * 3 * config.d_model * config.d_k  // W_q, W_k, W_v
                 + config.d_model * config.d_model;                  // W_o
  if (config.mechanism == Mechanism::svda) count += config.num_heads * config.d_k;
  return count;
}

size_t attention_param_delta(const AttentionConfig& config) {
  return config.num_heads * config.d_k;
}

}  // namespace svda
