#include "confsplat/synthetic.hpp"

#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "confsplat/errors.hpp"
#include "confsplat/io.hpp"
#include "confsplat/ply.hpp"
#include "confsplat/render.hpp"

namespace confsplat {
namespace {

Vec4 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec4 q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

// Blur that averages only valid pixels; invalid pixels stay invalid.
Raster masked_blur(const Raster& src, double sigma) {
  if (!(sigma > 0.0)) return src;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  Raster out = src;
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      if (!src.valid(x, y)) continue;
      double sum = 0.0, wsum = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int px = x + dx, py = y + dy;
          if (px < 0 || py < 0 || px >= src.width() || py >= src.height() || !src.valid(px, py)) {
            continue;
          }
          const double w = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
          sum += w * src.at(px, py);
          wsum += w;
        }
      }
      out.at(x, y) = sum / wsum;
    }
  }
  return out;
}

SparsePointSet back_project(const Camera& cam, const Raster& depth, int stride,
                            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> err(0.0, 1.0);
  SparsePointSet out;
  out.reproj_error.emplace();
  const Mat3 K_inv = cam.K.inverse();
  for (int y = 0; y < depth.height(); y += stride) {
    for (int x = 0; x < depth.width(); x += stride) {
      if (!depth.valid(x, y)) continue;
      const Vec3 ray = K_inv * Vec3(x, y, 1.0);
      const Vec3 cam_point = ray * (depth.at(x, y) / ray.z());
      out.points.push_back(cam.R.transpose() * (cam_point - cam.T));
      out.reproj_error->push_back(err(rng));
    }
  }
  return out;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_gaussians < 1 || n_views < 1) {
    throw InvalidParameter("synthetic: need at least one Gaussian and one view");
  }
  if (image_size < 3) {
    throw InvalidParameter("synthetic: image size must be at least 3");
  }
  if (!(ring_radius > 0.0) || !(focal_factor > 0.0) || sparse_stride < 1) {
    throw InvalidParameter("synthetic: ring radius, focal factor and stride must be positive");
  }
  if (init_noise < 0.0 || depth_blur < 0.0 || depth_noise < 0.0 || texture_copy < 0.0 ||
      corrupt_strength < 0.0 ||
      corrupt_views < 0 || corrupt_views > n_views) {
    throw InvalidParameter("synthetic: noise levels must be >= 0 and corrupt_views <= n_views");
  }
}

SyntheticScene generate_synthetic_scene(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SyntheticScene scene;
  scene.config = config;
  Vec3 centroid = Vec3::Zero();
  for (int i = 0; i < config.n_gaussians; ++i) {
    const Vec3 center(uniform(-0.5, 0.5), uniform(-0.5, 0.5), uniform(-0.5, 0.5));
    const Vec3 scale(uniform(0.05, 0.15), uniform(0.05, 0.15), uniform(0.05, 0.15));
    const Vec3 color(uniform(0.1, 0.9), uniform(0.1, 0.9), uniform(0.1, 0.9));
    scene.gaussians.push_back(Gaussian::from_values(center, scale, random_rotation(rng),
                                                    uniform(0.6, 0.95), color));
    centroid += center;
  }
  centroid /= config.n_gaussians;

  std::normal_distribution<double> noise(0.0, 1.0);
  scene.sparse.reproj_error.emplace();
  for (const Gaussian& g : scene.gaussians) {
    const Vec3 offset(noise(rng), noise(rng), noise(rng));
    scene.sparse.points.push_back(g.center + config.init_noise * offset);
    scene.sparse.reproj_error->push_back(uniform(0.0, 1.0));
  }

  const int s = config.image_size;
  const double f = config.focal_factor * s;
  Mat3 K;
  K << f, 0.0, 0.5 * (s - 1), 0.0, f, 0.5 * (s - 1), 0.0, 0.0, 1.0;
  const double phase = uniform(0.0, 2.0 * std::numbers::pi);
  for (int v = 0; v < config.n_views; ++v) {
    const double angle = phase + 2.0 * std::numbers::pi * v / config.n_views;
    const double height = 0.4 * std::sin(3.0 * angle);
    const Vec3 eye = centroid + Vec3(config.ring_radius * std::cos(angle),
                                     config.ring_radius * std::sin(angle), height);
    SyntheticView view;
    view.camera = look_at_camera(eye, centroid, Vec3::UnitZ(), K, s, s);
    const RenderOutput out = render(scene.gaussians, view.camera);
    view.image = out.color;
    view.true_depth = out.depth;
    view.alpha = uniform(0.6, 1.6);
    view.beta = uniform(-0.3, 0.3);
    view.corrupted = v >= config.n_views - config.corrupt_views;

    Raster distorted = masked_blur(view.true_depth, config.depth_blur);
    // Non-affine warp around the view's mean depth plus per-pixel noise.
    double mean = 0.0;
    for (std::size_t p = 0; p < distorted.pixel_count(); ++p) {
      if (distorted.valid(p)) mean += distorted.data()[p];
    }
    mean /= std::max<std::size_t>(1, distorted.valid_count());
    const double warp_phase = uniform(0.0, 2.0 * std::numbers::pi);
    Raster detail;
    if (config.texture_copy > 0.0) {
      // High-pass luma: bright detail reads as nearer.
      const Raster luma = view.image.luma();
      detail = masked_blur(luma, 2.0);
      for (std::size_t p = 0; p < detail.pixel_count(); ++p) {
        detail.data()[p] = luma.data()[p] - detail.data()[p];
      }
    }
    for (int y = 0; y < s; ++y) {
      for (int x = 0; x < s; ++x) {
        if (!distorted.valid(x, y)) continue;
        double d = distorted.at(x, y);
        if (view.corrupted) {
          const double rel = (d - mean) / mean;
          d += config.corrupt_strength * mean *
               (rel * rel * 4.0 + 0.5 * std::sin(6.0 * std::numbers::pi * x / s + warp_phase));
        }
        if (config.texture_copy > 0.0) d -= config.texture_copy * mean * detail.at(x, y);
        if (config.depth_noise > 0.0) d += config.depth_noise * noise(rng);
        distorted.at(x, y) = d;
      }
    }
    view.mono_depth = distorted;
    for (std::size_t p = 0; p < view.mono_depth.pixel_count(); ++p) {
      if (view.mono_depth.valid(p)) {
        view.mono_depth.data()[p] = (view.mono_depth.data()[p] - view.beta) / view.alpha;
      }
    }
    view.visible = back_project(view.camera, view.true_depth, config.sparse_stride, rng);
    scene.views.push_back(std::move(view));
  }
  return scene;
}

std::filesystem::path view_directory(const std::filesystem::path& scene_dir, int view) {
  char name[32];
  std::snprintf(name, sizeof(name), "view_%03d", view);
  return scene_dir / name;
}

int count_views(const std::filesystem::path& scene_dir) {
  int n = 0;
  while (std::filesystem::is_directory(view_directory(scene_dir, n))) ++n;
  return n;
}

void write_synthetic_scene(const std::filesystem::path& dir, const SyntheticScene& scene) {
  std::filesystem::create_directories(dir);
  write_gaussians(dir / "gt_gaussians.ply", scene.gaussians);
  write_point_set(dir / "sparse.ply", scene.sparse);
  nlohmann::json meta;
  const SyntheticConfig& c = scene.config;
  meta["n_gaussians"] = c.n_gaussians;
  meta["n_views"] = c.n_views;
  meta["image_size"] = c.image_size;
  meta["seed"] = c.seed;
  meta["init_noise"] = c.init_noise;
  meta["depth_blur"] = c.depth_blur;
  meta["depth_noise"] = c.depth_noise;
  meta["texture_copy"] = c.texture_copy;
  meta["corrupt_views"] = c.corrupt_views;
  meta["corrupt_strength"] = c.corrupt_strength;
  meta["views"] = nlohmann::json::array();
  for (std::size_t v = 0; v < scene.views.size(); ++v) {
    const SyntheticView& view = scene.views[v];
    const std::filesystem::path vd = view_directory(dir, static_cast<int>(v));
    std::filesystem::create_directories(vd);
    write_png(vd / "image.png", view.image);
    write_camera(vd / "camera.json", view.camera);
    write_raw_depth(vd / "depth_true.cdg", view.true_depth);
    write_raw_depth(vd / "depth_mono.cdg", view.mono_depth);
    write_point_set(vd / "sparse_visible.ply", view.visible);
    meta["views"].push_back({{"alpha", view.alpha}, {"beta", view.beta}, {"corrupted", view.corrupted}});
  }
  write_text(dir / "scene.json", meta.dump(2) + "\n");
}

}  // namespace confsplat
