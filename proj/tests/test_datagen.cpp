#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "svda/datagen.hpp"
#include "svda/io.hpp"
#include "svda/rng.hpp"
#include "testutil.hpp"

using namespace svda;
using testutil::TempDir;

namespace {

DatasetSpec tiny_spec() {
  DatasetSpec spec;
  spec.count = 8;
  spec.val_count = 4;
  spec.image_h = 16;
  spec.image_w = 16;
  spec.noise_std = 0.0;
  spec.seed = 77;
  return spec;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double vx = sxx / n - (sx / n) * (sx / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  return cov / std::sqrt(vx * vy);
}

}  // namespace

TEST_SUITE("datagen") {

TEST_CASE("spec validation") {
  CHECK_NOTHROW(DatasetSpec{}.validate());

  DatasetSpec spec = tiny_spec();
  spec.count = 0;
  CHECK_THROWS_AS(spec.validate(), Error);

  spec = tiny_spec();
  spec.num_shapes_min = 5;
  spec.num_shapes_max = 2;
  CHECK_THROWS_AS(spec.validate(), Error);

  spec = tiny_spec();
  spec.depth_levels_min = 6;
  spec.depth_levels_max = 5;
  CHECK_THROWS_AS(spec.validate(), Error);

  spec = tiny_spec();
  spec.num_shapes_max = 5;
  spec.depth_levels_min = 4;
  CHECK_THROWS_AS(spec.validate(), Error);  // more shapes than distinct levels

  spec = tiny_spec();
  spec.noise_std = -0.1;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("shape coverage predicates") {
  ShapeDesc rect;
  rect.kind = ShapeKind::rectangle;
  rect.r0 = 2;
  rect.r1 = 5;
  rect.c0 = 1;
  rect.c1 = 3;
  CHECK(shape_covers(rect, 2, 1));
  CHECK(shape_covers(rect, 4, 2));
  CHECK_FALSE(shape_covers(rect, 5, 1));  // half-open rows
  CHECK_FALSE(shape_covers(rect, 2, 3));  // half-open cols
  CHECK_FALSE(shape_covers(rect, 0, 0));

  ShapeDesc disc;
  disc.kind = ShapeKind::disc;
  disc.center_r = 4;
  disc.center_c = 4;
  disc.radius = 2;
  CHECK(shape_covers(disc, 4, 4));
  CHECK(shape_covers(disc, 4, 6));   // boundary included
  CHECK(shape_covers(disc, 6, 4));
  CHECK_FALSE(shape_covers(disc, 6, 6));  // sqrt(8) > 2
  CHECK_FALSE(shape_covers(disc, 4, 7));
}

TEST_CASE("depth rendering hand cases") {
  // empty scene: all background
  Tensor empty = render_depth({}, 3, 3);
  for (double v : empty.values()) CHECK(v == 1.0);

  // one rectangle
  ShapeDesc rect;
  rect.kind = ShapeKind::rectangle;
  rect.r0 = 0;
  rect.r1 = 2;
  rect.c0 = 1;
  rect.c1 = 3;
  rect.depth = 0.4;
  Tensor one = render_depth({rect}, 3, 3);
  CHECK(one.at(0, 1) == 0.4);
  CHECK(one.at(1, 2) == 0.4);
  CHECK(one.at(0, 0) == 1.0);
  CHECK(one.at(2, 1) == 1.0);

  // overlap: nearer (smaller depth) wins regardless of list order
  ShapeDesc near = rect;
  near.depth = 0.2;
  ShapeDesc far = rect;
  far.depth = 0.7;
  Tensor a = render_depth({near, far}, 3, 3);
  Tensor b = render_depth({far, near}, 3, 3);
  CHECK(a.at(0, 1) == 0.2);
  CHECK(b.at(0, 1) == 0.2);

  CHECK_THROWS_AS(render_depth({}, 0, 3), Error);
}

TEST_CASE("shading is linear in depth and clamped") {
  Tensor depth = Tensor::from_values({2, 2}, {0.25, 0.5, 0.75, 1.0});
  Rng rng(1);
  Tensor image = shade_image(depth, 0.0, rng);
  REQUIRE(image.shape() == std::vector<size_t>{1, 2, 2});
  CHECK(image.values()[0] == 1.0 - 0.8 * 0.25);
  CHECK(image.values()[1] == 1.0 - 0.8 * 0.5);
  CHECK(image.values()[2] == 1.0 - 0.8 * 0.75);
  CHECK(image.values()[3] == doctest::Approx(0.2).epsilon(1e-15));

  // huge noise still lands inside [0,1]
  Rng rng2(2);
  Tensor noisy = shade_image(depth, 50.0, rng2);
  for (double v : noisy.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("scene generation is a pure function of spec and index") {
  DatasetSpec spec = tiny_spec();
  spec.noise_std = 0.02;
  Scene a = generate_scene(spec, 3);
  Scene b = generate_scene(spec, 3);
  CHECK(a.image.values() == b.image.values());
  CHECK(a.depth.values() == b.depth.values());
  CHECK(a.seed == b.seed);
  CHECK(a.seed == combine_seed(spec.seed, 3));

  Scene c = generate_scene(spec, 4);
  CHECK(a.image.values() != c.image.values());

  DatasetSpec other = spec;
  other.seed = spec.seed + 1;
  Scene d = generate_scene(other, 3);
  CHECK(a.image.values() != d.image.values());
}

TEST_CASE("rendered depth equals the per-pixel minimum over covering shapes") {
  DatasetSpec spec = tiny_spec();
  for (size_t index = 0; index < 12; ++index) {
    SceneDetail detail = generate_scene_detail(spec, index);
    REQUIRE(!detail.shapes.empty());
    REQUIRE(detail.shapes.size() >= spec.num_shapes_min);
    REQUIRE(detail.shapes.size() <= spec.num_shapes_max);
    for (size_t r = 0; r < spec.image_h; ++r) {
      for (size_t c = 0; c < spec.image_w; ++c) {
        double expected = 1.0;
        for (const ShapeDesc& s : detail.shapes)
          if (shape_covers(s, r, c)) expected = std::min(expected, s.depth);
        CHECK(detail.scene.depth.at(r, c) == expected);
      }
    }
    // shapes occupy distinct depth levels strictly inside (0,1)
    for (size_t i = 0; i < detail.shapes.size(); ++i) {
      CHECK(detail.shapes[i].depth > 0.0);
      CHECK(detail.shapes[i].depth < 1.0);
      for (size_t j = i + 1; j < detail.shapes.size(); ++j)
        CHECK(detail.shapes[i].depth != detail.shapes[j].depth);
    }
  }
}

TEST_CASE("scene values respect their ranges") {
  DatasetSpec spec = tiny_spec();
  spec.noise_std = 0.02;
  for (size_t index = 0; index < 8; ++index) {
    Scene scene = generate_scene(spec, index);
    REQUIRE(scene.image.shape() == std::vector<size_t>{1, 16, 16});
    REQUIRE(scene.depth.shape() == std::vector<size_t>{16, 16});
    for (double v : scene.image.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (double v : scene.depth.values()) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("image intensity anti-correlates with depth") {
  // noise-free shading is exactly linear, so the pooled correlation is -1;
  // with default noise it must stay well below the -0.5 mark
  for (double noise : {0.0, 0.02}) {
    DatasetSpec spec = tiny_spec();
    spec.noise_std = noise;
    std::vector<double> intensities, depths;
    for (size_t index = 0; index < 8; ++index) {
      Scene scene = generate_scene(spec, index);
      for (size_t i = 0; i < scene.depth.numel(); ++i) {
        intensities.push_back(scene.image.values()[i]);
        depths.push_back(scene.depth.values()[i]);
      }
    }
    const double r = pearson(intensities, depths);
    CHECK(r < -0.5);
    if (noise == 0.0) CHECK(r == doctest::Approx(-1.0).epsilon(1e-9));
  }
}

TEST_CASE("tensor container layout is stable byte for byte") {
  TempDir dir;
  Tensor t = Tensor::from_values({2, 3}, {1.0, -2.5, 0.0, 3.5, 4.0, -0.125});
  const auto path = dir.path() / "t.tnsr";
  io::save_tensor(path, t);

  std::string bytes = testutil::read_file(path);
  std::string expected;
  expected += "TNSR";
  expected += std::string("\x01\x00\x00\x00", 4);  // version 1
  expected += '\x02';                              // rank 2
  auto append_u64 = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) expected += static_cast<char>((v >> (8 * i)) & 0xff);
  };
  append_u64(2);
  append_u64(3);
  for (double v : t.values()) {
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, 8);
    append_u64(bits);
  }
  CHECK(bytes == expected);
}

TEST_CASE("tensor container round-trips and rejects damage") {
  TempDir dir;
  Rng rng(5);
  Tensor t = testutil::random_tensor({3, 4, 5}, rng);
  const auto path = dir.path() / "t.tnsr";
  io::save_tensor(path, t);
  Tensor back = io::load_tensor(path);
  CHECK(back.shape() == t.shape());
  CHECK(back.values() == t.values());

  CHECK_THROWS_AS(io::load_tensor(dir.path() / "missing.tnsr"), Error);

  std::string bytes = testutil::read_file(path);
  std::string bad_magic = bytes;
  bad_magic[0] = 'Z';
  testutil::write_file(dir.path() / "bad_magic.tnsr", bad_magic);
  CHECK_THROWS_AS(io::load_tensor(dir.path() / "bad_magic.tnsr"), Error);

  testutil::write_file(dir.path() / "short.tnsr", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(io::load_tensor(dir.path() / "short.tnsr"), Error);

  testutil::write_file(dir.path() / "long.tnsr", bytes + "xx");
  CHECK_THROWS_AS(io::load_tensor(dir.path() / "long.tnsr"), Error);
}

TEST_CASE("scene pairs round-trip through the container") {
  TempDir dir;
  DatasetSpec spec = tiny_spec();
  spec.noise_std = 0.02;
  Scene scene = generate_scene(spec, 0);
  save_pair(scene, dir.path() / "img.tnsr", dir.path() / "dep.tnsr");
  Scene back = load_pair(dir.path() / "img.tnsr", dir.path() / "dep.tnsr");
  CHECK(back.image.values() == scene.image.values());
  CHECK(back.depth.values() == scene.depth.values());

  // depth with the wrong spatial size must be rejected
  io::save_tensor(dir.path() / "bad_dep.tnsr", Tensor::zeros({8, 8}));
  CHECK_THROWS_AS(load_pair(dir.path() / "img.tnsr", dir.path() / "bad_dep.tnsr"), Error);

  // non-positive depths break the log metrics downstream
  Tensor flat = Tensor::zeros({16, 16});
  io::save_tensor(dir.path() / "zero_dep.tnsr", flat);
  CHECK_THROWS_AS(load_pair(dir.path() / "img.tnsr", dir.path() / "zero_dep.tnsr"), Error);

  // rank-2 image is not a valid pair member
  io::save_tensor(dir.path() / "bad_img.tnsr", Tensor::zeros({16, 16}));
  CHECK_THROWS_AS(load_pair(dir.path() / "bad_img.tnsr", dir.path() / "dep.tnsr"), Error);
}

TEST_CASE("manifest round-trip and malformed input") {
  TempDir dir;
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"scene_00000_image.tnsr", "scene_00000_depth.tnsr"},
      {"scene_00001_image.tnsr", "scene_00001_depth.tnsr"},
  };
  const auto path = dir.path() / "manifest.tsv";
  io::save_manifest(path, pairs);

  std::string bytes = testutil::read_file(path);
  CHECK(bytes ==
        "scene_00000_image.tnsr\tscene_00000_depth.tnsr\n"
        "scene_00001_image.tnsr\tscene_00001_depth.tnsr\n");
  CHECK(bytes.find('\r') == std::string::npos);

  CHECK(io::load_manifest(path) == pairs);

  testutil::write_file(dir.path() / "bad.tsv", "only_one_column\n");
  CHECK_THROWS_AS(io::load_manifest(dir.path() / "bad.tsv"), Error);

  CHECK_THROWS_AS(io::load_manifest(dir.path() / "missing.tsv"), Error);

  // carriage returns from a Windows editor are tolerated
  testutil::write_file(dir.path() / "crlf.tsv", "a.tnsr\tb.tnsr\r\n");
  auto crlf = io::load_manifest(dir.path() / "crlf.tsv");
  REQUIRE(crlf.size() == 1);
  CHECK(crlf[0].first == "a.tnsr");
  CHECK(crlf[0].second == "b.tnsr");
}

}  // TEST_SUITE
