#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "confsplat/geometry.hpp"
#include "confsplat/raster.hpp"

namespace confsplat {

namespace render_constants {
/// Added to the projected covariance diagonal, px^2.
inline constexpr double kCovDilation = 0.3;
/// Gaussians whose camera-space depth is at or below this are culled.
inline constexpr double kNearPlane = 0.01;
inline constexpr double kMaxAlpha = 0.99;
/// Blending stops once transmittance drops below this.
inline constexpr double kMinTransmittance = 1e-4;
/// Depth is only defined where the accumulated alpha exceeds this.
inline constexpr double kCoverageFloor = 1e-6;
/// Footprint half-extent used for viewport culling, in standard deviations.
inline constexpr double kCullSigma = 3.0;
}  // namespace render_constants

using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Screen-space footprint of one Gaussian in one view.
struct ProjectedGaussian {
  Vec2 mean;        // pixels
  Mat2 cov;         // pixels^2, dilated
  Mat2 conic;       // cov^-1
  double depth;     // camera-space z
  double opacity;
  Vec3 color;

  // Intermediates reused by the backward pass.
  Vec3 camera_point;
  Mat23 jacobian;
  Mat3 covariance3d;
};

/// EWA first-order projection. Returns nullopt when the Gaussian is culled
/// (behind the near plane or its 3-sigma footprint misses the viewport).
std::optional<ProjectedGaussian> project_gaussian(const Gaussian& g, const Camera& camera);

struct RenderOutput {
  Raster color;      // 3 channels, valid everywhere
  Raster depth;      // 1 channel, valid where alpha_sum > coverage floor
  Raster alpha_sum;  // 1 channel, sum of alpha_j T_j
};

/// Front-to-back alpha blending of color and normalized alpha-weighted depth.
/// Throws InvalidParameter naming the first non-finite Gaussian.
RenderOutput render(std::span<const Gaussian> gaussians, const Camera& camera);

/// Gradients of a scalar loss with respect to every Gaussian parameter, laid out
/// as pack_gaussians() (center, log-scale, raw quaternion, opacity logit, color).
///
/// `grad_color` (3 channels) and `grad_depth` (1 channel) are dL/dC and dL/dD.
/// Depth cotangents are only read on pixels where the rendered depth is valid.
Eigen::VectorXd render_backward(std::span<const Gaussian> gaussians, const Camera& camera,
                                const Raster& grad_color, const Raster& grad_depth);

}  // namespace confsplat
