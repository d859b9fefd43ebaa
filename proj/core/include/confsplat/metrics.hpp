#pragma once

#include <optional>
#include <span>
#include <vector>

#include "confsplat/geometry.hpp"
#include "confsplat/raster.hpp"

namespace confsplat {

struct PointCloud {
  std::vector<Vec3> points;
  std::optional<std::vector<Vec3>> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  /// Finite points; normals, when present, match in length and are unit-norm.
  void validate() const;
};

/// 10 log10(1 / MSE) over all channels; +infinity when the images are identical.
double psnr(const Raster& pred, const Raster& gt);

struct GeometricReport {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fscore_percent = 0.0;
};

/// Precision: fraction of reconstructed points with a truth point closer than
/// `threshold`. Recall swaps the roles. Throws UndefinedMetric on an empty cloud.
GeometricReport fscore(const PointCloud& reconstructed, const PointCloud& truth, double threshold);

/// Bounding-box diagonal of `cloud` divided by 500.
double default_fscore_threshold(const PointCloud& cloud);

/// Centers of Gaussians whose opacity exceeds `min_opacity`.
PointCloud extract_points(std::span<const Gaussian> gaussians, double min_opacity = 0.5);

/// Applies x -> A x + t to every point; normals map by the inverse transpose of A.
PointCloud transform_cloud(const PointCloud& cloud, const Mat3& A, const Vec3& t);

}  // namespace confsplat
