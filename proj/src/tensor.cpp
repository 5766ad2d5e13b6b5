#include "svda/tensor.hpp"

#include <cmath>
#include <unordered_set>

namespace svda {

std::string shape_to_string(const std::vector<size_t>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

static size_t shape_numel(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t e : shape) {
    if (e == 0) throw Error(ErrorKind::invalid_argument, "tensor extents must be positive, got " + shape_to_string(shape));
    n *= e;
  }
  return n;
}

Tensor Tensor::zeros(std::vector<size_t> shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<size_t> shape, double value, bool requires_grad) {
  auto d = std::make_shared<detail::TensorData>();
  size_t n = shape_numel(shape);
  d->shape = std::move(shape);
  d->values.assign(n, value);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::from_values(std::vector<size_t> shape, std::vector<double> values, bool requires_grad) {
  size_t n = shape_numel(shape);
  if (n != values.size()) {
    throw Error(ErrorKind::shape_mismatch,
                "tensor shape " + shape_to_string(shape) + " needs " + std::to_string(n) +
                    " values, got " + std::to_string(values.size()));
  }
  auto d = std::make_shared<detail::TensorData>();
  d->shape = std::move(shape);
  d->values = std::move(values);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

size_t Tensor::rows() const {
  if (d_->shape.size() != 2) {
    throw Error(ErrorKind::invalid_argument, "expected 2-D tensor, got " + shape_to_string(d_->shape));
  }
  return d_->shape[0];
}

size_t Tensor::cols() const {
  if (d_->shape.size() != 2) {
    throw Error(ErrorKind::invalid_argument, "expected 2-D tensor, got " + shape_to_string(d_->shape));
  }
  return d_->shape[1];
}

std::vector<double>& Tensor::grad() {
  if (d_->grad.empty()) throw Error(ErrorKind::invalid_argument, "gradient not populated; run backward first");
  return d_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (d_->grad.empty()) throw Error(ErrorKind::invalid_argument, "gradient not populated; run backward first");
  return d_->grad;
}

void Tensor::ensure_zero_grad() { d_->grad.assign(d_->values.size(), 0.0); }

Tensor Tensor::detached_copy() const {
  return Tensor::from_values(d_->shape, d_->values, false);
}

void Tape::record(std::vector<Tensor> inputs, Tensor output, std::function<void()> backward_fn) {
  nodes_.push_back(Node{std::move(inputs), std::move(output), std::move(backward_fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw Error(ErrorKind::invalid_argument,
                "backward requires a scalar loss, got " +
                    (loss.defined() ? shape_to_string(loss.shape()) : std::string("undefined")));
  }
  if (!loss.requires_grad()) {
    throw Error(ErrorKind::invalid_argument, "loss is not connected to any recorded operation");
  }

  // Zero every participating gradient exactly once, then seed the loss.
  std::unordered_set<detail::TensorData*> touched;
  auto touch = [&](const Tensor& t) {
    if (t.requires_grad() && touched.insert(t.raw()).second) {
      const_cast<Tensor&>(t).ensure_zero_grad();
    }
  };
  for (const Node& node : nodes_) {
    for (const Tensor& in : node.inputs) touch(in);
    touch(node.output);
  }
  touch(loss);
  const_cast<Tensor&>(loss).grad()[0] = 1.0;

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->backward_fn) it->backward_fn();
  }
}

namespace {
thread_local Tape* g_active_tape = nullptr;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

void check_finite(const Tensor& t, const char* op_name) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::non_finite, std::string(op_name) + " produced a non-finite value");
    }
  }
}

}  // namespace svda
