#include "svda/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace svda::ops {

namespace {

void require_2d(const Tensor& t, const char* op) {
  if (t.shape().size() != 2) {
    throw Error(ErrorKind::shape_mismatch,
                std::string(op) + ": expected 2-D tensor, got " + shape_to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorKind::shape_mismatch, std::string(op) + ": shapes differ, " +
                                               shape_to_string(a.shape()) + " vs " +
                                               shape_to_string(b.shape()));
  }
}

bool grad_needed(std::initializer_list<Tensor> inputs) {
  if (!active_tape()) return false;
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) return true;
  }
  return false;
}

void record(std::initializer_list<Tensor> inputs, Tensor& out, std::function<void()> fn) {
  out.set_requires_grad(true);
  active_tape()->record(std::vector<Tensor>(inputs), out, std::move(fn));
}

// c[m x n] (+)= a[m x k] . b[k x n]
void gemm_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n,
             bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m x n] (+)= a[m x k] . b[n x k]^T
void gemm_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n,
             bool accumulate) {
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double dot = 0.0;
      for (size_t p = 0; p < k; ++p) dot += arow[p] * brow[p];
      crow[j] = accumulate ? crow[j] + dot : dot;
    }
  }
}

// c[q x r] (+)= a[p x q]^T . b[p x r]
void gemm_tn(const double* a, const double* b, double* c, size_t p, size_t q, size_t r,
             bool accumulate) {
  if (!accumulate) std::fill(c, c + q * r, 0.0);
  for (size_t s = 0; s < p; ++s) {
    const double* arow = a + s * q;
    const double* brow = b + s * r;
    for (size_t i = 0; i < q; ++i) {
      const double av = arow[i];
      double* crow = c + i * r;
      for (size_t j = 0; j < r; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor unary(const Tensor& a, const char* name, double (*f)(double), double (*df)(double)) {
  Tensor out = Tensor::zeros(a.shape());
  const size_t n = a.numel();
  for (size_t i = 0; i < n; ++i) out.values()[i] = f(a.values()[i]);
  check_finite(out, name);
  if (grad_needed({a})) {
    record({a}, out, [a, out, df]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += og[i] * df(a.values()[i]);
    });
  }
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::shape_mismatch, "matmul: inner extents differ, " +
                                               shape_to_string(a.shape()) + " vs " +
                                               shape_to_string(b.shape()));
  }
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = Tensor::zeros({m, n});
  gemm_nn(a.values().data(), b.values().data(), out.values().data(), m, k, n, false);
  check_finite(out, "matmul");
  if (grad_needed({a, b})) {
    record({a, b}, out, [a, b, out, m, k, n]() {
      const auto& og = out.grad();
      if (a.requires_grad()) {
        gemm_nt(og.data(), b.values().data(), const_cast<Tensor&>(a).grad().data(), m, n, k, true);
      }
      if (b.requires_grad()) {
        gemm_tn(a.values().data(), og.data(), const_cast<Tensor&>(b).grad().data(), m, k, n, true);
      }
    });
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul_nt");
  require_2d(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw Error(ErrorKind::shape_mismatch, "matmul_nt: inner extents differ, " +
                                               shape_to_string(a.shape()) + " vs " +
                                               shape_to_string(b.shape()) + " transposed");
  }
  const size_t m = a.rows(), k = a.cols(), n = b.rows();
  Tensor out = Tensor::zeros({m, n});
  gemm_nt(a.values().data(), b.values().data(), out.values().data(), m, k, n, false);
  check_finite(out, "matmul_nt");
  if (grad_needed({a, b})) {
    record({a, b}, out, [a, b, out, m, k, n]() {
      const auto& og = out.grad();
      if (a.requires_grad()) {
        gemm_nn(og.data(), b.values().data(), const_cast<Tensor&>(a).grad().data(), m, n, k, true);
      }
      if (b.requires_grad()) {
        gemm_tn(og.data(), a.values().data(), const_cast<Tensor&>(b).grad().data(), m, n, k, true);
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape());
  for (size_t i = 0; i < out.numel(); ++i) out.values()[i] = a.values()[i] + b.values()[i];
  check_finite(out, "add");
  if (grad_needed({a, b})) {
    record({a, b}, out, [a, b, out]() {
      const auto& og = out.grad();
      if (a.requires_grad()) {
        auto& g = const_cast<Tensor&>(a).grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += og[i];
      }
      if (b.requires_grad()) {
        auto& g = const_cast<Tensor&>(b).grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += og[i];
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape());
  for (size_t i = 0; i < out.numel(); ++i) out.values()[i] = a.values()[i] - b.values()[i];
  check_finite(out, "sub");
  if (grad_needed({a, b})) {
    record({a, b}, out, [a, b, out]() {
      const auto& og = out.grad();
      if (a.requires_grad()) {
        auto& g = const_cast<Tensor&>(a).grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += og[i];
      }
      if (b.requires_grad()) {
        auto& g = const_cast<Tensor&>(b).grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] -= og[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape());
  for (size_t i = 0; i < out.numel(); ++i) out.values()[i] = a.values()[i] * b.values()[i];
  check_finite(out, "mul");
  if (grad_needed({a, b})) {
    record({a, b}, out, [a, b, out]() {
      const auto& og = out.grad();
      if (a.requires_grad()) {
        auto& g = const_cast<Tensor&>(a).grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += og[i] * b.values()[i];
      }
      if (b.requires_grad()) {
        auto& g = const_cast<Tensor&>(b).grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += og[i] * a.values()[i];
      }
    });
  }
  return out;
}

Tensor scalar_mul(const Tensor& a, double s) {
  Tensor out = Tensor::zeros(a.shape());
  for (size_t i = 0; i < out.numel(); ++i) out.values()[i] = a.values()[i] * s;
  check_finite(out, "scalar_mul");
  if (grad_needed({a})) {
    record({a}, out, [a, out, s]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += og[i] * s;
    });
  }
  return out;
}

Tensor exp(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  for (size_t i = 0; i < out.numel(); ++i) out.values()[i] = std::exp(a.values()[i]);
  check_finite(out, "exp");
  if (grad_needed({a})) {
    record({a}, out, [a, out]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += og[i] * out.values()[i];
    });
  }
  return out;
}

Tensor ln(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  for (size_t i = 0; i < out.numel(); ++i) {
    if (a.values()[i] <= 0.0) {
      throw Error(ErrorKind::invalid_argument, "ln: non-positive input");
    }
    out.values()[i] = std::log(a.values()[i]);
  }
  check_finite(out, "ln");
  if (grad_needed({a})) {
    record({a}, out, [a, out]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += og[i] / a.values()[i];
    });
  }
  return out;
}

Tensor abs(const Tensor& a) {
  // d|x|/dx at 0 taken as 0
  return unary(
      a, "abs", [](double x) { return std::fabs(x); },
      [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor sigmoid(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  for (size_t i = 0; i < out.numel(); ++i) {
    const double x = a.values()[i];
    out.values()[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  check_finite(out, "sigmoid");
  if (grad_needed({a})) {
    record({a}, out, [a, out]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < g.size(); ++i) {
        const double y = out.values()[i];
        g[i] += og[i] * y * (1.0 - y);
      }
    });
  }
  return out;
}

Tensor gelu(const Tensor& a) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt2pi = 0.3989422804014326779;
  return unary(
      a, "gelu", [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [](double x) {
        const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
        const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
        return cdf + x * pdf;
      });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  Tensor out = Tensor::scalar(s);
  check_finite(out, "sum");
  if (grad_needed({a})) {
    record({a}, out, [a, out]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const double og = out.grad()[0];
      for (double& v : g) v += og;
    });
  }
  return out;
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  const double inv = 1.0 / static_cast<double>(a.numel());
  Tensor out = Tensor::scalar(s * inv);
  check_finite(out, "mean");
  if (grad_needed({a})) {
    record({a}, out, [a, out, inv]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const double og = out.grad()[0] * inv;
      for (double& v : g) v += og;
    });
  }
  return out;
}

Tensor reshape(const Tensor& a, std::vector<size_t> shape) {
  Tensor out = Tensor::from_values(shape, a.values());
  if (out.numel() != a.numel()) {
    throw Error(ErrorKind::shape_mismatch, "reshape: " + shape_to_string(a.shape()) +
                                               " cannot become " + shape_to_string(shape));
  }
  if (grad_needed({a})) {
    record({a}, out, [a, out]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += og[i];
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_2d(a, "transpose");
  const size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros({n, m});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) out.values()[j * m + i] = a.values()[i * n + j];
  if (grad_needed({a})) {
    record({a}, out, [a, out, m, n]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) g[i * n + j] += og[j * m + i];
    });
  }
  return out;
}

Tensor broadcast_add_row(const Tensor& a, const Tensor& bias) {
  require_2d(a, "broadcast_add_row");
  if (bias.shape().size() != 1 || bias.shape()[0] != a.cols()) {
    throw Error(ErrorKind::shape_mismatch, "broadcast_add_row: bias " +
                                               shape_to_string(bias.shape()) +
                                               " does not match columns of " +
                                               shape_to_string(a.shape()));
  }
  const size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros({m, n});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) out.values()[i * n + j] = a.values()[i * n + j] + bias.values()[j];
  check_finite(out, "broadcast_add_row");
  if (grad_needed({a, bias})) {
    record({a, bias}, out, [a, bias, out, m, n]() {
      const auto& og = out.grad();
      if (a.requires_grad()) {
        auto& g = const_cast<Tensor&>(a).grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += og[i];
      }
      if (bias.requires_grad()) {
        auto& g = const_cast<Tensor&>(bias).grad();
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < n; ++j) g[j] += og[i * n + j];
      }
    });
  }
  return out;
}

Tensor col_scale(const Tensor& a, const Tensor& scale) {
  require_2d(a, "col_scale");
  if (scale.shape().size() != 1 || scale.shape()[0] != a.cols()) {
    throw Error(ErrorKind::shape_mismatch, "col_scale: scale " + shape_to_string(scale.shape()) +
                                               " does not match columns of " +
                                               shape_to_string(a.shape()));
  }
  const size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros({m, n});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j)
      out.values()[i * n + j] = a.values()[i * n + j] * scale.values()[j];
  check_finite(out, "col_scale");
  if (grad_needed({a, scale})) {
    record({a, scale}, out, [a, scale, out, m, n]() {
      const auto& og = out.grad();
      if (a.requires_grad()) {
        auto& g = const_cast<Tensor&>(a).grad();
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < n; ++j) g[i * n + j] += og[i * n + j] * scale.values()[j];
      }
      if (scale.requires_grad()) {
        auto& g = const_cast<Tensor&>(scale).grad();
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < n; ++j) g[j] += og[i * n + j] * a.values()[i * n + j];
      }
    });
  }
  return out;
}

Tensor diag(const Tensor& a) {
  require_2d(a, "diag");
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::shape_mismatch, "diag: expected square matrix, got " + shape_to_string(a.shape()));
  }
  const size_t m = a.rows();
  Tensor out = Tensor::zeros({m});
  for (size_t i = 0; i < m; ++i) out.values()[i] = a.values()[i * m + i];
  if (grad_needed({a})) {
    record({a}, out, [a, out, m]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < m; ++i) g[i * m + i] += og[i];
    });
  }
  return out;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error(ErrorKind::invalid_argument, "concat_cols: no inputs");
  const size_t m = parts[0].rows();
  size_t total = 0;
  for (const Tensor& p : parts) {
    require_2d(p, "concat_cols");
    if (p.rows() != m) {
      throw Error(ErrorKind::shape_mismatch, "concat_cols: row counts differ, " +
                                                 shape_to_string(parts[0].shape()) + " vs " +
                                                 shape_to_string(p.shape()));
    }
    total += p.cols();
  }
  Tensor out = Tensor::zeros({m, total});
  size_t offset = 0;
  for (const Tensor& p : parts) {
    const size_t n = p.cols();
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < n; ++j) out.values()[i * total + offset + j] = p.values()[i * n + j];
    offset += n;
  }
  bool needs = false;
  if (active_tape()) {
    for (const Tensor& p : parts) needs = needs || p.requires_grad();
  }
  if (needs) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    out.set_requires_grad(true);
    active_tape()->record(inputs, out, [inputs, out, m, total]() {
      const auto& og = out.grad();
      size_t off = 0;
      for (const Tensor& p : inputs) {
        const size_t n = p.cols();
        if (p.requires_grad()) {
          auto& g = const_cast<Tensor&>(p).grad();
          for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j) g[i * n + j] += og[i * total + off + j];
        }
        off += n;
      }
    });
  }
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  require_2d(a, "softmax_rows");
  check_finite(a, "softmax_rows input");
  const size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros({m, n});
  for (size_t i = 0; i < m; ++i) {
    const double* row = a.values().data() + i * n;
    double* orow = out.values().data() + i * n;
    double mx = row[0];
    for (size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (size_t j = 0; j < n; ++j) {
      orow[j] = std::exp(row[j] - mx);
      denom += orow[j];
    }
    for (size_t j = 0; j < n; ++j) orow[j] /= denom;
  }
  check_finite(out, "softmax_rows");
  if (grad_needed({a})) {
    // dL/dx = y .* (g - <g, y>) per row
    record({a}, out, [a, out, m, n]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < m; ++i) {
        const double* y = out.values().data() + i * n;
        const double* go = og.data() + i * n;
        double dot = 0.0;
        for (size_t j = 0; j < n; ++j) dot += go[j] * y[j];
        double* gi = g.data() + i * n;
        for (size_t j = 0; j < n; ++j) gi[j] += y[j] * (go[j] - dot);
      }
    });
  }
  return out;
}

Tensor l2_normalize_rows(const Tensor& a, double eps) {
  require_2d(a, "l2_normalize_rows");
  if (eps <= 0.0) throw Error(ErrorKind::invalid_argument, "l2_normalize_rows: eps must be positive");
  const size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros({m, n});
  std::vector<double> norms(m);
  for (size_t i = 0; i < m; ++i) {
    const double* row = a.values().data() + i * n;
    double sq = 0.0;
    for (size_t j = 0; j < n; ++j) sq += row[j] * row[j];
    const double norm = std::sqrt(sq);
    norms[i] = norm;
    const double denom = std::max(norm, eps);
    double* orow = out.values().data() + i * n;
    for (size_t j = 0; j < n; ++j) orow[j] = row[j] / denom;
  }
  check_finite(out, "l2_normalize_rows");
  if (grad_needed({a})) {
    record({a}, out, [a, out, norms, eps, m, n]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t i = 0; i < m; ++i) {
        const double* y = out.values().data() + i * n;
        const double* go = og.data() + i * n;
        double* gi = g.data() + i * n;
        if (norms[i] > eps) {
          double dot = 0.0;
          for (size_t j = 0; j < n; ++j) dot += go[j] * y[j];
          for (size_t j = 0; j < n; ++j) gi[j] += (go[j] - y[j] * dot) / norms[i];
        } else {
          for (size_t j = 0; j < n; ++j) gi[j] += go[j] / eps;
        }
      }
    });
  }
  return out;
}

Tensor layer_norm_rows(const Tensor& a, const Tensor& gamma, const Tensor& beta, double eps) {
  require_2d(a, "layer_norm_rows");
  const size_t m = a.rows(), n = a.cols();
  if (gamma.shape() != std::vector<size_t>{n} || beta.shape() != std::vector<size_t>{n}) {
    throw Error(ErrorKind::shape_mismatch, "layer_norm_rows: gamma " +
                                               shape_to_string(gamma.shape()) + ", beta " +
                                               shape_to_string(beta.shape()) +
                                               " do not match columns of " +
                                               shape_to_string(a.shape()));
  }
  Tensor out = Tensor::zeros({m, n});
  std::vector<double> xhat(m * n);
  std::vector<double> inv_std(m);
  for (size_t i = 0; i < m; ++i) {
    const double* row = a.values().data() + i * n;
    double mu = 0.0;
    for (size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const double d = row[j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[i] = is;
    for (size_t j = 0; j < n; ++j) {
      const double xh = (row[j] - mu) * is;
      xhat[i * n + j] = xh;
      out.values()[i * n + j] = gamma.values()[j] * xh + beta.values()[j];
    }
  }
  check_finite(out, "layer_norm_rows");
  if (grad_needed({a, gamma, beta})) {
    record({a, gamma, beta}, out, [a, gamma, beta, out, xhat, inv_std, m, n]() {
      const auto& og = out.grad();
      if (gamma.requires_grad()) {
        auto& gg = const_cast<Tensor&>(gamma).grad();
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < n; ++j) gg[j] += og[i * n + j] * xhat[i * n + j];
      }
      if (beta.requires_grad()) {
        auto& gb = const_cast<Tensor&>(beta).grad();
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < n; ++j) gb[j] += og[i * n + j];
      }
      if (a.requires_grad()) {
        auto& ga = const_cast<Tensor&>(a).grad();
        const double invn = 1.0 / static_cast<double>(n);
        for (size_t i = 0; i < m; ++i) {
          const double* go = og.data() + i * n;
          const double* xh = xhat.data() + i * n;
          double mean_dy = 0.0, mean_dyxh = 0.0;
          for (size_t j = 0; j < n; ++j) {
            const double dy = go[j] * gamma.values()[j];
            mean_dy += dy;
            mean_dyxh += dy * xh[j];
          }
          mean_dy *= invn;
          mean_dyxh *= invn;
          for (size_t j = 0; j < n; ++j) {
            const double dy = go[j] * gamma.values()[j];
            ga[i * n + j] += inv_std[i] * (dy - mean_dy - xh[j] * mean_dyxh);
          }
        }
      }
    });
  }
  return out;
}

Tensor patch_grid_to_image(const Tensor& a, size_t grid_h, size_t grid_w, size_t patch) {
  require_2d(a, "patch_grid_to_image");
  if (a.rows() != grid_h * grid_w || a.cols() != patch * patch) {
    throw Error(ErrorKind::shape_mismatch,
                "patch_grid_to_image: " + shape_to_string(a.shape()) + " does not match grid " +
                    std::to_string(grid_h) + "x" + std::to_string(grid_w) + " with patch " +
                    std::to_string(patch));
  }
  const size_t H = grid_h * patch, W = grid_w * patch;
  Tensor out = Tensor::zeros({H, W});
  for (size_t pr = 0; pr < grid_h; ++pr)
    for (size_t pc = 0; pc < grid_w; ++pc) {
      const size_t t = pr * grid_w + pc;
      for (size_t r = 0; r < patch; ++r)
        for (size_t c = 0; c < patch; ++c)
          out.values()[(pr * patch + r) * W + pc * patch + c] =
              a.values()[t * patch * patch + r * patch + c];
    }
  if (grad_needed({a})) {
    record({a}, out, [a, out, grid_h, grid_w, patch, W]() {
      if (!a.requires_grad()) return;
      auto& g = const_cast<Tensor&>(a).grad();
      const auto& og = out.grad();
      for (size_t pr = 0; pr < grid_h; ++pr)
        for (size_t pc = 0; pc < grid_w; ++pc) {
          const size_t t = pr * grid_w + pc;
          for (size_t r = 0; r < patch; ++r)
            for (size_t c = 0; c < patch; ++c)
              g[t * patch * patch + r * patch + c] +=
                  og[(pr * patch + r) * W + pc * patch + c];
        }
    });
  }
  return out;
}

}  // namespace svda::ops
