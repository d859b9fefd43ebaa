#pragma once

#include <cstddef>

#include "confsplat/raster.hpp"
#include "confsplat/ssim.hpp"

namespace confsplat {

struct LossConfig {
  double lambda_max = 0.6;
  double k = 150.0;
  double lambda_dssim = 0.2;
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  double ssim_c1 = 1e-4;
  double ssim_c2 = 9e-4;

  void validate() const;
  SsimParams ssim_params() const { return {ssim_window, ssim_sigma, ssim_c1, ssim_c2}; }
};

struct DepthLoss {
  double value = 0.0;
  Raster grad;            // d value / d rendered depth
  std::size_t count = 0;  // |Omega|; zero means the depth term is skipped
  bool empty() const { return count == 0; }
};

/// Mean of C |D_render - D_est| over pixels valid in all three rasters.
DepthLoss depth_loss(const Raster& rendered, const Raster& estimated, const Raster& confidence);

/// lambda_max * exp(-k * alignment_loss).
double adaptive_weight(double alignment_loss, const LossConfig& config = {});

struct ImageLoss {
  double value = 0.0;
  double l1 = 0.0;
  double ssim = 1.0;
  Raster grad;  // d value / d pred
};

/// (1 - lambda_dssim) mean|pred - gt| + lambda_dssim (1 - SSIM(pred, gt)).
ImageLoss image_loss(const Raster& pred, const Raster& gt, const LossConfig& config = {});

double total_loss(double image_term, double depth_term, double lambda_d);

}  // namespace confsplat
