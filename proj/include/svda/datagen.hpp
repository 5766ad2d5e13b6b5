#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "svda/rng.hpp"
#include "svda/tensor.hpp"

namespace svda {

/// One synthetic depth scene. Intensities lie in [0,1]; depths are strictly
/// positive (normalized to (0,1]) so log-based metrics are always defined.
struct Scene {
  Tensor image;  // [1 x H x W]
  Tensor depth;  // [H x W]
  uint64_t seed = 0;
};

struct DatasetSpec {
  size_t count = 256;
  size_t val_count = 64;
  size_t image_h = 64;
  size_t image_w = 64;
  size_t num_shapes_min = 1;
  size_t num_shapes_max = 4;
  size_t depth_levels_min = 4;
  size_t depth_levels_max = 8;
  double noise_std = 0.02;
  uint64_t seed = 1234;

  void validate() const;
};

enum class ShapeKind { rectangle, disc };

/// Axis-aligned rectangle over rows [r0,r1) x cols [c0,c1), or a disc of the
/// given radius; every shape sits at one depth value in (0,1).
struct ShapeDesc {
  ShapeKind kind = ShapeKind::rectangle;
  size_t r0 = 0, c0 = 0, r1 = 0, c1 = 0;  // rectangle extent
  size_t center_r = 0, center_c = 0, radius = 0;  // disc extent
  double depth = 1.0;
};

bool shape_covers(const ShapeDesc& s, size_t r, size_t c);

/// Depth buffer with painter's-algorithm occlusion: each pixel takes the
/// minimum depth among covering shapes, background at 1.0.
Tensor render_depth(const std::vector<ShapeDesc>& shapes, size_t h, size_t w);

/// intensity = 1 - 0.8 * depth (nearer = brighter), plus Gaussian pixel noise
/// drawn row-major from rng, clamped to [0,1].
Tensor shade_image(const Tensor& depth, double noise_std, Rng& rng);

struct SceneDetail {
  Scene scene;
  std::vector<ShapeDesc> shapes;
};

/// Pure function of (spec, index): the scene seed is combine_seed(spec.seed,
/// index), so any scene regenerates without its predecessors.
SceneDetail generate_scene_detail(const DatasetSpec& spec, size_t index);
Scene generate_scene(const DatasetSpec& spec, size_t index);

void save_pair(const Scene& scene, const std::filesystem::path& image_path,
               const std::filesystem::path& depth_path);
Scene load_pair(const std::filesystem::path& image_path,
                const std::filesystem::path& depth_path);

}  // namespace svda
