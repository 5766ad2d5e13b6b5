#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "svda/rng.hpp"
#include "svda/tensor.hpp"

namespace testutil {

inline svda::Tensor random_tensor(std::vector<size_t> shape, svda::Rng& rng, double lo = -1.0,
                                  double hi = 1.0, bool requires_grad = false) {
  svda::Tensor t = svda::Tensor::zeros(std::move(shape), requires_grad);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

/// Plain three-loop reference product, independent of the library kernels.
inline svda::Tensor matmul_oracle(const svda::Tensor& a, const svda::Tensor& b) {
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  svda::Tensor out = svda::Tensor::zeros({m, n});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      out.at(i, j) = acc;
    }
  return out;
}

inline double max_abs_diff(const svda::Tensor& a, const svda::Tensor& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.numel(); ++i)
    worst = std::max(worst, std::fabs(a.values()[i] - b.values()[i]));
  return worst;
}

/// Central-difference check of already-populated analytic gradients.
/// eval_loss must re-run the forward pass without a tape and return the loss;
/// coords_per_tensor caps how many coordinates are probed per tensor (all of
/// them when the tensor is smaller). Returns the worst relative error
/// |analytic - fd| / max(1, |analytic|, |fd|).
inline double max_fd_rel_error(const std::function<double()>& eval_loss,
                               const std::vector<svda::Tensor>& params, svda::Rng& rng,
                               size_t coords_per_tensor, double h = 1e-5) {
  double worst = 0.0;
  for (const svda::Tensor& p : params) {
    if (!p.has_grad()) continue;
    std::vector<size_t> coords;
    if (p.numel() <= coords_per_tensor) {
      for (size_t i = 0; i < p.numel(); ++i) coords.push_back(i);
    } else {
      for (size_t i = 0; i < coords_per_tensor; ++i) coords.push_back(rng.next_below(p.numel()));
    }
    // const_cast: the probe restores every value it touches.
    auto& values = const_cast<svda::Tensor&>(p).values();
    for (size_t c : coords) {
      const double saved = values[c];
      values[c] = saved + h;
      const double up = eval_loss();
      values[c] = saved - h;
      const double down = eval_loss();
      values[c] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double ag = p.grad()[c];
      const double rel = std::fabs(ag - fd) / std::max({1.0, std::fabs(ag), std::fabs(fd)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "svda_test") {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return {};
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return;
  std::fwrite(bytes.data(), 1, bytes.size(), f);
  std::fclose(f);
}

}  // namespace testutil
