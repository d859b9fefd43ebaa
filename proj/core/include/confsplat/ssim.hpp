#pragma once

#include "confsplat/raster.hpp"

namespace confsplat {

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double c1 = 1e-4;  // (0.01 * L)^2 with L = 1
  double c2 = 9e-4;  // (0.03 * L)^2
};

/// Mean structural similarity over all pixels and channels. Local statistics use a
/// normalized Gaussian window with zero padding, so the map keeps the image size.
double ssim(const Raster& a, const Raster& b, const SsimParams& params = {});

struct SsimGradient {
  double value = 0.0;
  Raster grad;  // d ssim / d a, same shape as a
};

SsimGradient ssim_with_gradient(const Raster& a, const Raster& b, const SsimParams& params = {});

}  // namespace confsplat
