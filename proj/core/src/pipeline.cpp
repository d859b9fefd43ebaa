#include "confsplat/pipeline.hpp"

#include <cmath>
#include <limits>

#include "confsplat/confidence.hpp"
#include "confsplat/errors.hpp"
#include "confsplat/io.hpp"
#include "confsplat/ply.hpp"

namespace confsplat {

PreparedView prepare_view(const Raster& image, const Raster& mono, const SparsePointSet& points,
                          const Camera& camera, const AlignConfig& align,
                          const ConfidenceConfig& confidence) {
  const SparseDepth sparse = project_sparse_depth(points, camera);
  PreparedView out;
  out.alignment = align_depth(mono, sparse.target, sparse.weights, align);
  out.confidence = compute_confidence(image, out.alignment.aligned_depth, confidence);
  return out;
}

std::vector<TrainView> prepare_synthetic_views(const SyntheticScene& scene,
                                               const AlignConfig& align,
                                               const ConfidenceConfig& confidence,
                                               std::vector<AlignmentResult>* alignments) {
  std::vector<TrainView> views;
  if (alignments) alignments->clear();
  for (const SyntheticView& v : scene.views) {
    PreparedView p = prepare_view(v.image, v.mono_depth, v.visible, v.camera, align, confidence);
    TrainView tv;
    tv.image = v.image;
    tv.depth = p.alignment.aligned_depth;
    tv.confidence = std::move(p.confidence);
    tv.alignment_loss = p.alignment.alignment_loss;
    tv.camera = v.camera;
    views.push_back(std::move(tv));
    if (alignments) alignments->push_back(std::move(p.alignment));
  }
  return views;
}

double depth_rmse(const Raster& a, const Raster& b) {
  a.require_same_shape(b, "depth_rmse");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    if (a.valid(p) && b.valid(p)) {
      const double d = a.data()[p] - b.data()[p];
      sum += d * d;
      ++n;
    }
  }
  return n ? std::sqrt(sum / static_cast<double>(n)) : std::numeric_limits<double>::quiet_NaN();
}

namespace {

int require_views(const std::filesystem::path& scene_dir) {
  const int n = count_views(scene_dir);
  if (n == 0) {
    throw IoError("no view_000 directory in " + scene_dir.string());
  }
  return n;
}

}  // namespace

std::vector<AlignmentResult> run_align_stage(const std::filesystem::path& scene_dir,
                                             const AlignConfig& config) {
  const int n = require_views(scene_dir);
  std::optional<SparsePointSet> global;
  std::vector<AlignmentResult> results;
  for (int v = 0; v < n; ++v) {
    const std::filesystem::path vd = view_directory(scene_dir, v);
    const Camera camera = read_camera(vd / "camera.json");
    const Raster mono = read_raw_depth(vd / "depth_mono.cdg");
    SparsePointSet points;
    if (std::filesystem::exists(vd / "sparse_visible.ply")) {
      points = read_point_set(vd / "sparse_visible.ply");
    } else {
      if (!global) global = read_point_set(scene_dir / "sparse.ply");
      points = *global;
    }
    const SparseDepth sparse = project_sparse_depth(points, camera);
    AlignmentResult r = align_depth(mono, sparse.target, sparse.weights, config);
    write_raw_depth(vd / "depth_aligned.cdg", r.aligned_depth);
    write_alignment_sidecar(vd / "align.json", r);
    results.push_back(std::move(r));
  }
  return results;
}

void run_confidence_stage(const std::filesystem::path& scene_dir, const ConfidenceConfig& config) {
  const int n = require_views(scene_dir);
  for (int v = 0; v < n; ++v) {
    const std::filesystem::path vd = view_directory(scene_dir, v);
    const Raster image = read_png(vd / "image.png");
    const Raster depth = read_raw_depth(vd / "depth_aligned.cdg");
    const Raster c = compute_confidence(image, depth, config);
    write_raw_depth(vd / "confidence.conf", c);
    write_png(vd / "confidence.png", c);
  }
}

std::vector<TrainView> load_train_views(const std::filesystem::path& scene_dir) {
  const int n = require_views(scene_dir);
  std::vector<TrainView> views;
  for (int v = 0; v < n; ++v) {
    const std::filesystem::path vd = view_directory(scene_dir, v);
    TrainView tv;
    tv.camera = read_camera(vd / "camera.json");
    tv.image = read_png(vd / "image.png");
    tv.depth = read_raw_depth(vd / "depth_aligned.cdg");
    tv.confidence = read_raw_depth(vd / "confidence.conf");
    tv.alignment_loss = read_alignment_sidecar(vd / "align.json").alignment_loss;
    views.push_back(std::move(tv));
  }
  return views;
}

}  // namespace confsplat
