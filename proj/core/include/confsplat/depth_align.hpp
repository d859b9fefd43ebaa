#pragma once

#include <cstddef>

#include "confsplat/geometry.hpp"
#include "confsplat/raster.hpp"

namespace confsplat {

struct AlignConfig {
  double learning_rate = 1.0;
  double lr_decay = 0.999;         // per step
  double negative_weight = 1.0;    // weight of the negative-depth penalty
  double convergence_tol = 1e-5;   // relative objective change
  int convergence_patience = 100;  // consecutive steps below tolerance
  int max_steps = 1000;            // per optimization stage
  double prune_ratio = 1e-3;       // fraction of the valid set removed once
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-12;
};

/// Sparse depth rasterized into one view.
struct SparseDepth {
  Raster target;   // depth of the front-most projected point, invalid elsewhere
  Raster weights;  // 1 / (1 + reprojection error), or 1 without errors
};

/// Projects points into `camera`, rounding to the nearest pixel. Collisions keep the
/// smaller depth; points behind the camera or outside the image are dropped.
SparseDepth project_sparse_depth(const SparsePointSet& points, const Camera& camera);

struct AlignmentResult {
  double scale = 1.0;
  double shift = 0.0;
  Raster aligned_depth;         // scale * initial + shift on every valid pixel of `initial`
  double alignment_loss = 0.0;  // weighted MSE over the (pruned) valid set
  std::size_t valid_count = 0;  // size of the valid set after pruning
  std::size_t pruned_count = 0;
  int steps = 0;
};

/// Fits scale and shift of `initial` against the sparse `target` with Adam, pruning the
/// worst residuals once after the first convergence.
///
/// The valid set is the pixels valid in all three rasters. Throws DimensionMismatch,
/// InsufficientConstraints (fewer than two valid pixels) or Divergence.
AlignmentResult align_depth(const Raster& initial, const Raster& target, const Raster& weights,
                            const AlignConfig& config = {});

/// Weighted mean squared alignment residual over the pixels valid in all rasters.
double alignment_loss(const Raster& initial, const Raster& target, const Raster& weights,
                      double scale, double shift);

}  // namespace confsplat
