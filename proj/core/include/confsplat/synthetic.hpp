#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "confsplat/geometry.hpp"
#include "confsplat/raster.hpp"

namespace confsplat {

struct SyntheticConfig {
  int n_gaussians = 20;
  int n_views = 8;
  int image_size = 64;
  std::uint64_t seed = 0;
  double ring_radius = 2.5;
  double focal_factor = 1.1;   // focal length in units of the image size
  double init_noise = 0.05;    // std of the position noise on sparse.ply
  double depth_blur = 0.0;     // Gaussian blur (pixels) of the monocular depth
  double depth_noise = 0.0;    // std of additive monocular depth noise, in true-depth units
  double texture_copy = 0.0;   // image detail leaked into the monocular depth, x mean depth
  int corrupt_views = 0;       // views whose monocular depth is distorted non-affinely
  double corrupt_strength = 0.5;
  int sparse_stride = 3;       // pixel stride of the per-view visible sparse points

  void validate() const;
};

struct SyntheticView {
  Camera camera;
  Raster image;        // rendered color
  Raster true_depth;   // rendered depth
  Raster mono_depth;   // (distorted true depth - beta) / alpha
  double alpha = 1.0;  // true_depth ~ alpha * mono_depth + beta
  double beta = 0.0;
  bool corrupted = false;
  SparsePointSet visible;  // back-projected pixel centers of the true depth
};

struct SyntheticScene {
  SyntheticConfig config;
  std::vector<Gaussian> gaussians;
  SparsePointSet sparse;  // noisy Gaussian centers with reprojection errors
  std::vector<SyntheticView> views;
};

SyntheticScene generate_synthetic_scene(const SyntheticConfig& config);

/// Directory layout:
///   gt_gaussians.ply, sparse.ply, scene.json
///   view_XXX/{image.png, camera.json, depth_true.cdg, depth_mono.cdg, sparse_visible.ply}
void write_synthetic_scene(const std::filesystem::path& dir, const SyntheticScene& scene);

std::filesystem::path view_directory(const std::filesystem::path& scene_dir, int view);

/// Number of view_XXX directories present in `scene_dir`.
int count_views(const std::filesystem::path& scene_dir);

}  // namespace confsplat
