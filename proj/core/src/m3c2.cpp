#include "confsplat/m3c2.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <optional>

#include "confsplat/errors.hpp"
#include "confsplat/kdtree.hpp"

namespace confsplat {
namespace {

std::optional<Vec3> fit_normal(const KdTree& tree, const Vec3& core, double radius,
                               const Vec3& orientation) {
  const std::vector<std::size_t> idx = tree.radius_search(core, radius);
  if (idx.size() < 3) {
    return std::nullopt;
  }
  Vec3 mean = Vec3::Zero();
  for (std::size_t i : idx) mean += tree.point(i);
  mean /= static_cast<double>(idx.size());
  Mat3 cov = Mat3::Zero();
  for (std::size_t i : idx) {
    const Vec3 d = tree.point(i) - mean;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();  // ascending
  // Collinear (or coincident) neighborhoods leave the plane undetermined.
  if (!(ev[1] > 1e-10 * ev[2])) {
    return std::nullopt;
  }
  Vec3 n = eig.eigenvectors().col(0).normalized();
  if (n.dot(orientation) < 0.0) n = -n;
  return n;
}

// Mean signed position along n of the points inside the cylinder, if any.
std::optional<double> cylinder_mean(const KdTree& tree, const Vec3& core, const Vec3& n,
                                    double radius, double depth) {
  const std::vector<std::size_t> idx = tree.radius_search(core, std::hypot(radius, depth));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i : idx) {
    const Vec3 d = tree.point(i) - core;
    const double along = d.dot(n);
    const double across = (d - along * n).norm();
    if (std::abs(along) <= depth && across <= radius) {
      sum += along;
      ++count;
    }
  }
  if (count == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(count);
}

}  // namespace

M3C2Params default_m3c2_params(const PointCloud& reference) {
  if (reference.size() < 2) {
    throw UndefinedMetric("m3c2: need at least two reference points for default scales");
  }
  const KdTree tree(reference.points);
  double spacing = 0.0;
  for (const Vec3& p : reference.points) {
    spacing += tree.knn(p, 2).back().distance;
  }
  spacing /= static_cast<double>(reference.size());
  M3C2Params params;
  params.normal_scale = 20.0 * spacing;
  params.cylinder_radius = params.normal_scale / 2.0;
  params.max_depth = 5.0 * params.normal_scale;
  return params;
}

M3C2Result m3c2(const PointCloud& reference, const PointCloud& compared, const M3C2Params& params) {
  if (reference.empty() || compared.empty()) {
    throw UndefinedMetric("m3c2: both clouds must be nonempty");
  }
  if (!(params.normal_scale > 0.0) || !(params.cylinder_radius > 0.0) ||
      !(params.max_depth > 0.0) || params.core_stride == 0) {
    throw InvalidParameter("m3c2: scales must be positive and the core stride nonzero");
  }
  const KdTree ref_tree(reference.points);
  const KdTree cmp_tree(compared.points);

  M3C2Result out;
  for (std::size_t i = 0; i < reference.size(); i += params.core_stride) {
    out.core_points.push_back(reference.points[i]);
  }
  const std::size_t n_core = out.core_points.size();
  out.normals.assign(n_core, Vec3::Zero());
  out.distances.assign(n_core, std::numeric_limits<double>::quiet_NaN());

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_core); ++c) {
    const Vec3& core = out.core_points[c];
    const std::optional<Vec3> n =
        fit_normal(ref_tree, core, params.normal_scale / 2.0, params.orientation);
    if (!n) continue;
    out.normals[c] = *n;
    const auto ref_mean = cylinder_mean(ref_tree, core, *n, params.cylinder_radius, params.max_depth);
    const auto cmp_mean = cylinder_mean(cmp_tree, core, *n, params.cylinder_radius, params.max_depth);
    if (ref_mean && cmp_mean) {
      out.distances[c] = *cmp_mean - *ref_mean;
    }
  }

  double sq = 0.0;
  for (double d : out.distances) {
    if (std::isfinite(d)) {
      sq += d * d;
      ++out.valid_count;
    }
  }
  out.rmse = out.valid_count > 0 ? std::sqrt(sq / static_cast<double>(out.valid_count))
                                 : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace confsplat
