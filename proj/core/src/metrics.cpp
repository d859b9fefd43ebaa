#include "confsplat/metrics.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "confsplat/errors.hpp"
#include "confsplat/kdtree.hpp"

namespace confsplat {
namespace {

double fraction_within(const std::vector<Vec3>& from, const KdTree& to, double threshold) {
  std::size_t hits = 0;
  for (const Vec3& p : from) {
    if (to.nearest(p).distance < threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(from.size());
}

}  // namespace

void PointCloud::validate() const {
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw InvalidParameter("point cloud: non-finite point");
  }
  if (normals) {
    if (normals->size() != points.size()) {
      throw DimensionMismatch("point cloud: normals and points differ in length");
    }
    for (const Vec3& n : *normals) {
      if (!(std::abs(n.norm() - 1.0) <= 1e-6)) {
        throw InvalidParameter("point cloud: normals must be unit length");
      }
    }
  }
}

double psnr(const Raster& pred, const Raster& gt) {
  pred.require_same_shape(gt, "psnr");
  if (pred.empty()) {
    throw UndefinedMetric("psnr: empty image");
  }
  double sum = 0.0;
  const auto a = pred.data();
  const auto b = gt.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += (a[i] - b[i]) * (a[i] - b[i]);
  }
  const double mse = sum / static_cast<double>(a.size());
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(1.0 / mse);
}

GeometricReport fscore(const PointCloud& reconstructed, const PointCloud& truth, double threshold) {
  if (reconstructed.empty() || truth.empty()) {
    throw UndefinedMetric("fscore: both clouds must be nonempty");
  }
  if (!(threshold > 0.0)) {
    throw InvalidParameter("fscore: threshold must be positive");
  }
  const KdTree truth_tree(truth.points);
  const KdTree rec_tree(reconstructed.points);
  GeometricReport r;
  r.threshold = threshold;
  r.precision = fraction_within(reconstructed.points, truth_tree, threshold);
  r.recall = fraction_within(truth.points, rec_tree, threshold);
  const double s = r.precision + r.recall;
  r.fscore_percent = s > 0.0 ? 200.0 * r.precision * r.recall / s : 0.0;
  return r;
}

double default_fscore_threshold(const PointCloud& cloud) {
  if (cloud.empty()) {
    throw UndefinedMetric("default_fscore_threshold: empty cloud");
  }
  Vec3 lo = cloud.points.front(), hi = lo;
  for (const Vec3& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm() / 500.0;
}

PointCloud extract_points(std::span<const Gaussian> gaussians, double min_opacity) {
  PointCloud out;
  for (const Gaussian& g : gaussians) {
    if (g.opacity() > min_opacity) out.points.push_back(g.center);
  }
  return out;
}

PointCloud transform_cloud(const PointCloud& cloud, const Mat3& A, const Vec3& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(A * p + t);
  if (cloud.normals) {
    out.normals.emplace();
    const Mat3 normal_map = A.inverse().transpose();
    for (const Vec3& n : *cloud.normals) out.normals->push_back((normal_map * n).normalized());
  }
  return out;
}

}  // namespace confsplat
