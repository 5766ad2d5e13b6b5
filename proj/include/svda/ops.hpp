#pragma once

#include <span>
#include <vector>

#include "svda/tensor.hpp"

namespace svda::ops {

// All operations allocate a fresh output, validate shapes, verify the result
// is finite, and record a backward rule on the active tape when any input
// requires gradients. Without an active tape they are plain evaluations.

Tensor matmul(const Tensor& a, const Tensor& b);     // [m x k] . [k x n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m x k] . [n x k]^T

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scalar_mul(const Tensor& a, double s);

Tensor exp(const Tensor& a);
Tensor ln(const Tensor& a);  // rejects non-positive input
Tensor abs(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor gelu(const Tensor& a);  // exact erf form

Tensor sum(const Tensor& a);   // -> [1]
Tensor mean(const Tensor& a);  // -> [1]

Tensor reshape(const Tensor& a, std::vector<size_t> shape);
Tensor transpose(const Tensor& a);  // 2-D

/// y(i,j) = a(i,j) + bias(j)
Tensor broadcast_add_row(const Tensor& a, const Tensor& bias);

/// y(i,j) = a(i,j) * scale(j); right-multiplication by diag(scale).
Tensor col_scale(const Tensor& a, const Tensor& scale);

/// Diagonal of a square matrix as a vector [m].
Tensor diag(const Tensor& a);

Tensor concat_cols(std::span<const Tensor> parts);

/// Row-wise softmax with per-row max subtraction.
Tensor softmax_rows(const Tensor& a);

/// Rows scaled to unit length; rows with norm <= eps are divided by eps.
Tensor l2_normalize_rows(const Tensor& a, double eps = 1e-8);

Tensor layer_norm_rows(const Tensor& a, const Tensor& gamma, const Tensor& beta,
                       double eps = 1e-5);

/// Places per-patch pixel blocks [n x P*P] onto the [gh*P x gw*P] image grid,
/// patches in row-major order.
Tensor patch_grid_to_image(const Tensor& a, size_t grid_h, size_t grid_w, size_t patch);

}  // namespace svda::ops
