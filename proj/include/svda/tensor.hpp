#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "svda/error.hpp"

namespace svda {

namespace detail {
struct TensorData {
  std::vector<size_t> shape;
  std::vector<double> values;  // row-major
  bool requires_grad = false;
  std::vector<double> grad;  // empty until backward allocates it
};
}  // namespace detail

std::string shape_to_string(const std::vector<size_t>& shape);

/// Dense 64-bit tensor. Value-semantic handle over shared storage; two copies
/// of a Tensor alias the same values and gradient.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<size_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<size_t> shape, double value, bool requires_grad = false);
  static Tensor from_values(std::vector<size_t> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return static_cast<bool>(d_); }
  const std::vector<size_t>& shape() const { return d_->shape; }
  size_t numel() const { return d_->values.size(); }

  // 2-D helpers
  size_t rows() const;
  size_t cols() const;
  double at(size_t r, size_t c) const { return d_->values[r * cols() + c]; }
  double& at(size_t r, size_t c) { return d_->values[r * cols() + c]; }

  std::vector<double>& values() { return d_->values; }
  const std::vector<double>& values() const { return d_->values; }

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool rg) { d_->requires_grad = rg; }

  bool has_grad() const { return !d_->grad.empty(); }
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void ensure_zero_grad();  // allocate if missing, then zero-fill

  /// Copy of values only; no gradient, no tape link.
  Tensor detached_copy() const;

  detail::TensorData* raw() const { return d_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}
  std::shared_ptr<detail::TensorData> d_;
};

/// Records the forward pass as a flat list of nodes in execution order
/// (inputs always precede their consumers) and replays the stored backward
/// rules exactly once, in reverse, on backward(). Rebuilt every forward pass.
class Tape {
 public:
  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    std::function<void()> backward_fn;
  };

  size_t node_count() const { return nodes_.size(); }
  void record(std::vector<Tensor> inputs, Tensor output, std::function<void()> backward_fn);

  /// Populates grad on every requires_grad tensor reachable from the tape.
  /// loss must be a scalar produced through recorded operations.
  void backward(const Tensor& loss);

  void clear() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;
};

/// Makes a tape the active recording target for the current thread.
/// Without an active scope, operations evaluate without recording.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

/// Throws ErrorKind::non_finite if any entry is NaN or infinite.
void check_finite(const Tensor& t, const char* op_name);

}  // namespace svda
