#pragma once

#include <filesystem>
#include <vector>

#include "confsplat/config.hpp"
#include "confsplat/depth_align.hpp"
#include "confsplat/synthetic.hpp"
#include "confsplat/trainer.hpp"

namespace confsplat {

/// Stage outputs for one view kept in memory.
struct PreparedView {
  AlignmentResult alignment;
  Raster confidence;
};

/// Aligns `mono` to the sparse points seen by `camera`, then fuses confidence from
/// `image` and the aligned depth.
PreparedView prepare_view(const Raster& image, const Raster& mono, const SparsePointSet& points,
                          const Camera& camera, const AlignConfig& align,
                          const ConfidenceConfig& confidence);

/// In-memory views of a synthetic scene, with each view's own visible points.
std::vector<TrainView> prepare_synthetic_views(const SyntheticScene& scene,
                                               const AlignConfig& align,
                                               const ConfidenceConfig& confidence,
                                               std::vector<AlignmentResult>* alignments = nullptr);

/// Root-mean-square difference over pixels valid in both rasters (NaN when none).
double depth_rmse(const Raster& a, const Raster& b);

// Scene-directory stages. Each reads the files written by the previous one.

/// Writes view_XXX/depth_aligned.cdg and view_XXX/align.json. Uses
/// view_XXX/sparse_visible.ply when present, else the scene's sparse.ply.
std::vector<AlignmentResult> run_align_stage(const std::filesystem::path& scene_dir,
                                             const AlignConfig& config);

/// Writes view_XXX/confidence.conf and view_XXX/confidence.png.
void run_confidence_stage(const std::filesystem::path& scene_dir, const ConfidenceConfig& config);

/// Loads image, aligned depth, confidence, alignment loss and camera of every view.
std::vector<TrainView> load_train_views(const std::filesystem::path& scene_dir);

}  // namespace confsplat
