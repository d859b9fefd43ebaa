#include "confsplat/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "confsplat/errors.hpp"

namespace confsplat {
namespace {

void require_min_size(const Raster& image, const char* what) {
  if (image.width() < 3 || image.height() < 3) {
    throw DimensionMismatch(std::string(what) + ": image must be at least 3x3");
  }
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Separable Gaussian blur with replicate border.
Raster gaussian_blur(const Raster& src, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int w = src.width(), h = src.height();
  Raster tmp(w, h, 1), out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * src.at(clamp_index(x + i, w), y);
      }
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * tmp.at(x, clamp_index(y + i, h));
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

void ConfidenceConfig::validate() const {
  for (double w : {w_edge, w_texture, w_gradient}) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw InvalidParameter("confidence: weights must lie in [0, 1]");
    }
  }
  if (std::abs(w_edge + w_texture + w_gradient - 1.0) > 1e-9) {
    throw InvalidParameter("confidence: weights must sum to 1");
  }
  if (!(w_texture > w_gradient && w_gradient > w_edge)) {
    throw InvalidParameter("confidence: weights must satisfy w_texture > w_gradient > w_edge");
  }
  if (!(epsilon > 0.0)) {
    throw InvalidParameter("confidence: epsilon must be positive");
  }
  if (!(canny_low >= 0.0 && canny_high >= canny_low)) {
    throw InvalidParameter("confidence: Canny thresholds must satisfy 0 <= low <= high");
  }
  if (!(canny_sigma > 0.0)) {
    throw InvalidParameter("confidence: Canny sigma must be positive");
  }
}

Raster canny_edges(const Raster& image, double low, double high, double sigma) {
  require_min_size(image, "canny_edges");
  const int w = image.width(), h = image.height();
  Raster luma = image.luma();
  for (double& v : luma.data()) v *= 255.0;
  const Raster blurred = gaussian_blur(luma, sigma);

  std::vector<double> mag(luma.pixel_count()), gx(mag.size()), gy(mag.size());
  const auto px = [&](int x, int y) { return blurred.at(clamp_index(x, w), clamp_index(y, h)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
      const double dy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = dx;
      gy[i] = dy;
      mag[i] = std::hypot(dx, dy);
    }
  }

  const auto mag_at = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return mag[static_cast<std::size_t>(y) * w + x];
  };

  // Non-maximum suppression along the quantized gradient direction.
  std::vector<double> thin(mag.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double m = mag[i];
      if (m <= 0.0) continue;
      double angle = std::atan2(gy[i], gx[i]) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      int ox, oy;
      if (angle < 22.5 || angle >= 157.5) {
        ox = 1, oy = 0;
      } else if (angle < 67.5) {
        ox = 1, oy = 1;
      } else if (angle < 112.5) {
        ox = 0, oy = 1;
      } else {
        ox = -1, oy = 1;
      }
      // Strict on one side, non-strict on the other so plateaus keep one pixel.
      if (m > mag_at(x - ox, y - oy) && m >= mag_at(x + ox, y + oy)) {
        thin[i] = m;
      }
    }
  }

  // Hysteresis: keep weak pixels 8-connected to a strong one.
  Raster edges(w, h, 1, 0.0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < thin.size(); ++i) {
    if (thin[i] >= high && thin[i] > 0.0) {
      edges.data()[i] = 255.0;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (edges.data()[j] == 0.0 && thin[j] >= low && thin[j] > 0.0) {
          edges.data()[j] = 255.0;
          stack.push_back(j);
        }
      }
    }
  }
  return edges;
}

Raster edge_confidence(const Raster& image, const ConfidenceConfig& config) {
  require_min_size(image, "edge_confidence");
  Raster out = canny_edges(image, config.canny_low, config.canny_high, config.canny_sigma);
  for (double& v : out.data()) v = 1.0 - v / 255.0;
  return out;
}

Raster texture_confidence(const Raster& image) {
  require_min_size(image, "texture_confidence");
  const Raster luma = image.luma();
  const int w = luma.width(), h = luma.height();
  Raster out(w, h, 1);
  double max_abs = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double lap = luma.at(clamp_index(x - 1, w), y) + luma.at(clamp_index(x + 1, w), y) +
                         luma.at(x, clamp_index(y - 1, h)) + luma.at(x, clamp_index(y + 1, h)) -
                         4.0 * luma.at(x, y);
      out.at(x, y) = std::abs(lap);
      max_abs = std::max(max_abs, std::abs(lap));
    }
  }
  for (double& v : out.data()) {
    v = max_abs > 0.0 ? 1.0 - v / max_abs : 1.0;
  }
  return out;
}

Raster gradient_confidence(const Raster& depth, double epsilon) {
  if (depth.channels() != 1) {
    throw DimensionMismatch("gradient_confidence: depth must have one channel");
  }
  if (!(epsilon > 0.0)) {
    throw InvalidParameter("gradient_confidence: epsilon must be positive");
  }
  const int w = depth.width(), h = depth.height();
  const auto ok = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h && depth.valid(x, y);
  };
  // One axis of the gradient; (sx, sy) is the unit step along it.
  const auto derivative = [&](int x, int y, int sx, int sy) {
    const bool fwd = ok(x + sx, y + sy);
    const bool back = ok(x - sx, y - sy);
    if (fwd && back) return 0.5 * (depth.at(x + sx, y + sy) - depth.at(x - sx, y - sy));
    if (fwd) return depth.at(x + sx, y + sy) - depth.at(x, y);
    if (back) return depth.at(x, y) - depth.at(x - sx, y - sy);
    return 0.0;
  };

  Raster out(w, h, 1, 0.0, false);
  double max_raw = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(x, y)) continue;
      const double g = std::hypot(derivative(x, y, 1, 0), derivative(x, y, 0, 1));
      const double raw = 1.0 / (g + epsilon);
      out.at(x, y) = raw;
      out.set_valid(x, y, true);
      max_raw = std::max(max_raw, raw);
    }
  }
  if (max_raw == 0.0) {
    throw EmptyMap("gradient_confidence: depth map has no valid pixel");
  }
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    if (out.valid(p)) out.data()[p] /= max_raw;
  }
  return out;
}

Raster fuse_confidence(const Raster& edge, const Raster& texture, const Raster& gradient,
                       const ConfidenceConfig& config) {
  edge.require_same_shape(texture, "fuse_confidence");
  edge.require_same_shape(gradient, "fuse_confidence");
  if (edge.channels() != 1) {
    throw DimensionMismatch("fuse_confidence: confidence maps must have one channel");
  }
  Raster out(edge.width(), edge.height(), 1, 0.0, false);
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    if (!(edge.valid(p) && texture.valid(p) && gradient.valid(p))) continue;
    const double c = config.w_edge * edge.data()[p] + config.w_texture * texture.data()[p] +
                     config.w_gradient * gradient.data()[p];
    out.data()[p] = std::clamp(c, 0.0, 1.0);
    out.mask()[p] = 1;
  }
  return out;
}

Raster compute_confidence(const Raster& image, const Raster& depth,
                          const ConfidenceConfig& config) {
  config.validate();
  image.require_same_size(depth, "compute_confidence");
  return fuse_confidence(edge_confidence(image, config), texture_confidence(image),
                         gradient_confidence(depth, config.epsilon), config);
}

}  // namespace confsplat
