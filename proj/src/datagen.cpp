#include "svda/datagen.hpp"

#include <algorithm>
#include <numeric>

#include "svda/error.hpp"
#include "svda/io.hpp"

namespace svda {

void DatasetSpec::validate() const {
  if (count == 0) throw Error(ErrorKind::config, "dataset count must be at least 1");
  if (image_h == 0 || image_w == 0)
    throw Error(ErrorKind::config, "scene dimensions must be positive");
  if (num_shapes_min > num_shapes_max)
    throw Error(ErrorKind::config, "num_shapes range is inverted");
  if (depth_levels_min > depth_levels_max)
    throw Error(ErrorKind::config, "depth_levels range is inverted");
  if (depth_levels_min == 0) throw Error(ErrorKind::config, "depth_levels must be positive");
  if (num_shapes_max > depth_levels_min)
    throw Error(ErrorKind::config,
                "num_shapes max " + std::to_string(num_shapes_max) +
                    " exceeds depth_levels min " + std::to_string(depth_levels_min) +
                    "; shapes need distinct depth levels");
  if (noise_std < 0.0) throw Error(ErrorKind::config, "noise_std must be non-negative");
}

bool shape_covers(const ShapeDesc& s, size_t r, size_t c) {
  if (s.kind == ShapeKind::rectangle) return r >= s.r0 && r < s.r1 && c >= s.c0 && c < s.c1;
  const double dr = static_cast<double>(r) - static_cast<double>(s.center_r);
  const double dc = static_cast<double>(c) - static_cast<double>(s.center_c);
  return dr * dr + dc * dc <= static_cast<double>(s.radius) * static_cast<double>(s.radius);
}

Tensor render_depth(const std::vector<ShapeDesc>& shapes, size_t h, size_t w) {
  if (h == 0 || w == 0)
    throw Error(ErrorKind::invalid_argument, "render_depth: zero-area image");
  Tensor depth = Tensor::full({h, w}, 1.0);
  // Far-to-near painting: nearer shapes overwrite, so each pixel ends at the
  // minimum covering depth.
  std::vector<const ShapeDesc*> order;
  order.reserve(shapes.size());
  for (const ShapeDesc& s : shapes) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](const ShapeDesc* a, const ShapeDesc* b) { return a->depth > b->depth; });
  for (const ShapeDesc* s : order)
    for (size_t r = 0; r < h; ++r)
      for (size_t c = 0; c < w; ++c)
        if (shape_covers(*s, r, c)) depth.values()[r * w + c] = s->depth;
  return depth;
}

Tensor shade_image(const Tensor& depth, double noise_std, Rng& rng) {
  const size_t h = depth.rows();
  const size_t w = depth.cols();
  Tensor image = Tensor::zeros({1, h, w});
  for (size_t i = 0; i < h * w; ++i) {
    double v = 1.0 - 0.8 * depth.values()[i];
    if (noise_std > 0.0) v += noise_std * rng.gaussian();
    image.values()[i] = std::clamp(v, 0.0, 1.0);
  }
  return image;
}

SceneDetail generate_scene_detail(const DatasetSpec& spec, size_t index) {
  spec.validate();
  const uint64_t scene_seed = combine_seed(spec.seed, index);
  Rng rng(scene_seed);

  const size_t k = spec.num_shapes_min +
                   rng.next_below(spec.num_shapes_max - spec.num_shapes_min + 1);
  const size_t levels = spec.depth_levels_min +
                        rng.next_below(spec.depth_levels_max - spec.depth_levels_min + 1);
  // Distinct depth levels i/(levels+1), i = 1..levels, all strictly inside
  // (0,1); shapes draw the first k of a shuffled assignment.
  std::vector<size_t> level_order(levels);
  std::iota(level_order.begin(), level_order.end(), size_t{1});
  rng.shuffle(level_order);

  SceneDetail out;
  for (size_t i = 0; i < k; ++i) {
    ShapeDesc s;
    s.depth = static_cast<double>(level_order[i]) / static_cast<double>(levels + 1);
    s.kind = rng.next_below(2) == 0 ? ShapeKind::rectangle : ShapeKind::disc;
    if (s.kind == ShapeKind::rectangle) {
      s.r0 = rng.next_below(spec.image_h);
      s.c0 = rng.next_below(spec.image_w);
      const size_t max_h = std::max<size_t>(1, spec.image_h / 2);
      const size_t max_w = std::max<size_t>(1, spec.image_w / 2);
      s.r1 = std::min(spec.image_h, s.r0 + 1 + rng.next_below(max_h));
      s.c1 = std::min(spec.image_w, s.c0 + 1 + rng.next_below(max_w));
    } else {
      s.center_r = rng.next_below(spec.image_h);
      s.center_c = rng.next_below(spec.image_w);
      s.radius = 1 + rng.next_below(std::max<size_t>(1, std::min(spec.image_h, spec.image_w) / 4));
    }
    out.shapes.push_back(s);
  }

  out.scene.depth = render_depth(out.shapes, spec.image_h, spec.image_w);
  out.scene.image = shade_image(out.scene.depth, spec.noise_std, rng);
  out.scene.seed = scene_seed;
  return out;
}

Scene generate_scene(const DatasetSpec& spec, size_t index) {
  return generate_scene_detail(spec, index).scene;
}

void save_pair(const Scene& scene, const std::filesystem::path& image_path,
               const std::filesystem::path& depth_path) {
  io::save_tensor(image_path, scene.image);
  io::save_tensor(depth_path, scene.depth);
}

Scene load_pair(const std::filesystem::path& image_path,
                const std::filesystem::path& depth_path) {
  Scene scene;
  scene.image = io::load_tensor(image_path);
  scene.depth = io::load_tensor(depth_path);
  const auto& is = scene.image.shape();
  const auto& ds = scene.depth.shape();
  if (is.size() != 3 || is[0] != 1)
    throw Error(ErrorKind::shape_mismatch,
                image_path.string() + ": image must be [1 x H x W], got " + shape_to_string(is));
  if (ds.size() != 2 || ds[0] != is[1] || ds[1] != is[2])
    throw Error(ErrorKind::shape_mismatch,
                depth_path.string() + ": depth " + shape_to_string(ds) +
                    " does not match image " + shape_to_string(is));
  for (double d : scene.depth.values())
    if (!(d > 0.0))
      throw Error(ErrorKind::invalid_argument,
                  depth_path.string() + ": depth values must be strictly positive");
  return scene;
}

}  // namespace svda
