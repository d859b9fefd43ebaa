#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "confsplat/adam.hpp"
#include "confsplat/geometry.hpp"
#include "confsplat/losses.hpp"
#include "confsplat/raster.hpp"

namespace confsplat {

/// Which depth term enters the objective.
enum class DepthMode {
  kFull,          // confidence-weighted depth loss with adaptive lambda_d
  kImageOnly,     // image loss alone; depth loss is logged but not optimized
  kNoConfidence,  // C = 1 on every valid pixel, adaptive lambda_d
  kFixedWeight,   // confidence-weighted, lambda_d = lambda_max for every view
};

std::string to_string(DepthMode mode);
DepthMode depth_mode_from_string(const std::string& name);

struct TrainConfig {
  int iterations = 2000;
  double lr_center_init = 1.6e-4;
  double lr_center_final = 1.6e-6;
  double lr_color = 2.5e-3;
  double lr_opacity = 5e-2;
  double lr_scale = 5e-3;
  double lr_rotation = 1e-3;
  double spatial_lr_scale = 0.0;  // multiplies the center rate; <= 0 uses the camera extent
  AdamConfig adam;
  double prune_opacity_below = 0.005;
  int prune_interval = 500;  // 0 disables pruning
  std::uint64_t seed = 0;
  DepthMode mode = DepthMode::kFull;
  LossConfig loss;

  void validate() const;
};

struct TrainView {
  Raster image;       // 3-channel target in [0, 1]
  Raster depth;       // aligned depth estimate
  Raster confidence;  // fused confidence map
  double alignment_loss = 0.0;
  Camera camera;
};

struct HistoryRecord {
  int iteration = 0;
  double image_loss = 0.0;
  double depth_loss = 0.0;
  double lambda_d = 0.0;
  double total_loss = 0.0;
  double psnr_train = 0.0;
  int view = 0;
};

struct TrainState {
  Eigen::VectorXd params;  // packed Gaussians
  AdamState adam;
  int iteration = 0;
  std::vector<HistoryRecord> history;

  std::vector<Gaussian> gaussians() const { return unpack_gaussians(params); }
  std::size_t gaussian_count() const {
    return static_cast<std::size_t>(params.size()) / param::kCount;
  }
};

/// One isotropic Gaussian per point with scale = mean distance to the 3 nearest
/// neighbors (0.01 with fewer than 4 points), opacity 0.1, identity rotation and the
/// point color or mid-gray.
std::vector<Gaussian> init_from_sparse(const SparsePointSet& points);

/// 1.1 x the largest distance of a camera center from their mean (at least 1e-6).
double camera_extent(const std::vector<TrainView>& views);

/// Called after every iteration with the updated state.
using TrainObserver = std::function<void(const TrainState&)>;

/// Runs cfg.iterations steps of single-view Adam on the packed Gaussians.
/// Throws TrainingAborted on a non-finite loss or when pruning removes every Gaussian.
TrainState train(const std::vector<Gaussian>& initial, const std::vector<TrainView>& views,
                 const TrainConfig& config, const TrainObserver& observer = {});

}  // namespace confsplat
