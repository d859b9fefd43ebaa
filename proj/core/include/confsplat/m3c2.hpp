#pragma once

#include <cstddef>
#include <vector>

#include "confsplat/metrics.hpp"

namespace confsplat {

struct M3C2Params {
  double normal_scale = 0.0;     // D; normals fitted over radius D/2
  double cylinder_radius = 0.0;
  double max_depth = 0.0;        // half-length of the projection cylinder
  std::size_t core_stride = 1;   // every k-th reference point is a core point
  Vec3 orientation = Vec3::UnitZ();  // normals are flipped to have n . orientation >= 0
};

/// D = 20x the mean nearest-neighbor spacing of `reference`, radius D/2, depth 5D.
M3C2Params default_m3c2_params(const PointCloud& reference);

struct M3C2Result {
  std::vector<Vec3> core_points;
  std::vector<Vec3> normals;       // zero for core points without a normal
  std::vector<double> distances;   // NaN for invalid core points
  std::size_t valid_count = 0;
  double rmse = 0.0;               // over valid core points; NaN when none
};

/// Signed distance from reference to compared along the local reference normal:
/// mean projection of compared points in the cylinder minus that of reference points.
M3C2Result m3c2(const PointCloud& reference, const PointCloud& compared, const M3C2Params& params);

}  // namespace confsplat
