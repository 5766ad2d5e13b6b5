#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svda/attention.hpp"
#include "svda/datagen.hpp"
#include "svda/indicators.hpp"
#include "svda/metrics.hpp"
#include "svda/model.hpp"
#include "svda/ops.hpp"

namespace py = pybind11;

namespace {

using Matrix = std::vector<std::vector<double>>;

svda::Tensor to_tensor(const Matrix& rows, const char* name) {
  if (rows.empty())
    throw svda::Error(svda::ErrorKind::invalid_argument, std::string(name) + ": empty matrix");
  const size_t cols = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols)
      throw svda::Error(svda::ErrorKind::shape_mismatch,
                        std::string(name) + ": ragged rows in matrix");
    values.insert(values.end(), row.begin(), row.end());
  }
  return svda::Tensor::from_values({rows.size(), cols}, std::move(values));
}

svda::Tensor to_vector_tensor(const std::vector<double>& v, const char* name) {
  if (v.empty())
    throw svda::Error(svda::ErrorKind::invalid_argument, std::string(name) + ": empty vector");
  return svda::Tensor::from_values({v.size()}, std::vector<double>(v));
}

Matrix from_tensor(const svda::Tensor& t) {
  Matrix rows(t.rows(), std::vector<double>(t.cols()));
  for (size_t r = 0; r < t.rows(); ++r)
    for (size_t c = 0; c < t.cols(); ++c) rows[r][c] = t.at(r, c);
  return rows;
}

svda::HeadOutput run_head(const Matrix& x, const Matrix& w_q, const Matrix& w_k,
                          const Matrix& w_v, const std::vector<double>* sigma) {
  svda::HeadParams p;
  p.w_q = to_tensor(w_q, "w_q");
  p.w_k = to_tensor(w_k, "w_k");
  p.w_v = to_tensor(w_v, "w_v");
  const size_t d_k = p.w_q.cols();
  if (sigma) {
    p.sigma = to_vector_tensor(*sigma, "sigma");
    return svda::svda_head_forward(to_tensor(x, "x"), p, d_k, /*capture=*/true);
  }
  return svda::baseline_head_forward(to_tensor(x, "x"), p, d_k, /*capture=*/true);
}

py::dict head_result(const svda::HeadOutput& out) {
  py::dict d;
  d["y"] = from_tensor(out.y);
  d["attention"] = from_tensor(out.record->attention);
  d["q_normalized"] = from_tensor(out.record->q_normalized);
  d["k_normalized"] = from_tensor(out.record->k_normalized);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "spectral attention core operations";

  py::register_exception<svda::Error>(m, "SvdaError");

  m.def("softmax_rows",
        [](const Matrix& x) { return from_tensor(svda::ops::softmax_rows(to_tensor(x, "x"))); },
        py::arg("x"), "Row-wise softmax.");

  m.def("l2_normalize_rows",
        [](const Matrix& x) {
          return from_tensor(svda::ops::l2_normalize_rows(to_tensor(x, "x")));
        },
        py::arg("x"), "Rows scaled to unit Euclidean length.");

  m.def("svda_attention",
        [](const Matrix& x, const Matrix& w_q, const Matrix& w_k, const Matrix& w_v,
           const std::vector<double>& sigma) {
          return head_result(run_head(x, w_q, w_k, w_v, &sigma));
        },
        py::arg("x"), py::arg("w_q"), py::arg("w_k"), py::arg("w_v"), py::arg("sigma"),
        "One spectral attention head; returns y, attention, and the normalized projections.");

  m.def("baseline_attention",
        [](const Matrix& x, const Matrix& w_q, const Matrix& w_k, const Matrix& w_v) {
          return head_result(run_head(x, w_q, w_k, w_v, nullptr));
        },
        py::arg("x"), py::arg("w_q"), py::arg("w_k"), py::arg("w_v"),
        "One standard scaled dot-product head.");

  m.def("spectral_entropy",
        [](const std::vector<double>& sigma) {
          return svda::spectral_entropy(to_vector_tensor(sigma, "sigma"));
        },
        py::arg("sigma"));

  m.def("effective_rank",
        [](const std::vector<double>& sigma) {
          return svda::effective_rank(to_vector_tensor(sigma, "sigma"));
        },
        py::arg("sigma"));

  m.def("selectivity",
        [](const Matrix& attention) {
          return svda::selectivity(to_tensor(attention, "attention"));
        },
        py::arg("attention"));

  m.def("spectral_sparsity",
        [](const std::vector<double>& sigma, double eps) {
          return svda::spectral_sparsity(to_vector_tensor(sigma, "sigma"), eps);
        },
        py::arg("sigma"), py::arg("eps") = 0.01);

  m.def("compute_metrics",
        [](const Matrix& pred, const Matrix& gt) {
          const svda::DepthMetrics v =
              svda::compute_metrics(to_tensor(pred, "pred"), to_tensor(gt, "gt"));
          py::dict d;
          d["abs_rel"] = v.abs_rel;
          d["sq_rel"] = v.sq_rel;
          d["rmse"] = v.rmse;
          d["rmse_log"] = v.rmse_log;
          d["srmse_log"] = v.srmse_log;
          d["delta1"] = v.delta1;
          return d;
        },
        py::arg("pred"), py::arg("gt"), "The six depth-error metrics for one image pair.");

  m.def("generate_scene",
        [](size_t h, size_t w, uint64_t seed, size_t index, double noise_std) {
          svda::DatasetSpec spec;
          spec.image_h = h;
          spec.image_w = w;
          spec.seed = seed;
          spec.noise_std = noise_std;
          const svda::Scene scene = svda::generate_scene(spec, index);
          Matrix image(h, std::vector<double>(w));
          Matrix depth(h, std::vector<double>(w));
          for (size_t r = 0; r < h; ++r)
            for (size_t c = 0; c < w; ++c) {
              image[r][c] = scene.image.values()[r * w + c];
              depth[r][c] = scene.depth.values()[r * w + c];
            }
          py::dict d;
          d["image"] = image;
          d["depth"] = depth;
          d["seed"] = scene.seed;
          return d;
        },
        py::arg("h") = 64, py::arg("w") = 64, py::arg("seed") = 1234, py::arg("index") = 0,
        py::arg("noise_std") = 0.02, "One deterministic synthetic depth scene.");

  m.def("model_param_count",
        [](size_t d_model, size_t num_heads, size_t d_k, size_t num_layers, size_t mlp_hidden,
           size_t patch_size, size_t image_h, size_t image_w, const std::string& mechanism) {
          svda::ModelConfig config;
          config.image_h = image_h;
          config.image_w = image_w;
          config.patch_size = patch_size;
          config.d_model = d_model;
          config.num_layers = num_layers;
          config.mlp_hidden = mlp_hidden;
          config.attention.d_model = d_model;
          config.attention.num_heads = num_heads;
          config.attention.d_k = d_k;
          config.attention.mechanism = svda::mechanism_from_string(mechanism);
          return svda::model_param_count(config);
        },
        py::arg("d_model") = 64, py::arg("num_heads") = 4, py::arg("d_k") = 16,
        py::arg("num_layers") = 4, py::arg("mlp_hidden") = 256, py::arg("patch_size") = 8,
        py::arg("image_h") = 64, py::arg("image_w") = 64, py::arg("mechanism") = "svda",
        "Learnable scalar count for a model configuration.");
}
