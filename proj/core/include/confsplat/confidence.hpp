#pragma once

#include "confsplat/raster.hpp"

namespace confsplat {

struct ConfidenceConfig {
  double w_edge = 0.2;
  double w_texture = 0.5;
  double w_gradient = 0.3;
  double epsilon = 1e-6;
  double canny_low = 50.0;  // on the 8-bit luma scale
  double canny_high = 150.0;
  double canny_sigma = 1.4;

  /// Weights in [0,1] summing to 1 with w_texture > w_gradient > w_edge.
  void validate() const;
};

/// Binary Canny edge map with values in {0, 255}: Gaussian blur, Sobel gradients,
/// 4-direction non-maximum suppression and 8-connected hysteresis.
/// `image` is a 1- or 3-channel raster in [0, 1]; thresholds are on the 0-255 scale.
Raster canny_edges(const Raster& image, double low, double high, double sigma = 1.4);

/// 1 - E(I) / 255. Throws DimensionMismatch for images smaller than 3x3.
Raster edge_confidence(const Raster& image, const ConfidenceConfig& config = {});

/// 1 - |Laplacian| / max |Laplacian| on luma (5-point kernel, replicate border).
Raster texture_confidence(const Raster& image);

/// 1 / (|grad D| + eps), normalized by its maximum over valid pixels.
/// Central differences that fall back to one-sided differences next to invalid or
/// out-of-image neighbors. Invalid pixels are 0 and stay invalid.
/// Throws EmptyMap when no pixel is valid.
Raster gradient_confidence(const Raster& depth, double epsilon = 1e-6);

/// w_e C_e + w_t C_t + w_g C_g clamped to [0, 1]; valid where all inputs are valid.
Raster fuse_confidence(const Raster& edge, const Raster& texture, const Raster& gradient,
                       const ConfidenceConfig& config = {});

/// All three cues from an image and its aligned depth, fused.
Raster compute_confidence(const Raster& image, const Raster& depth,
                          const ConfidenceConfig& config = {});

}  // namespace confsplat
