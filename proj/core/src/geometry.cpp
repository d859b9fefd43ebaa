#include "confsplat/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "confsplat/errors.hpp"

namespace confsplat {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidParameter("logit: probability must lie in (0, 1), got " + std::to_string(p));
  }
  return std::log(p / (1.0 - p));
}

Mat3 rotation_matrix(const Vec4& quaternion) {
  const Vec4 q = quaternion.normalized();
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 m;
  m << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return m;
}

Vec4 quaternion_multiply(const Vec4& a, const Vec4& b) {
  return Vec4(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
              a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
              a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
              a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]);
}

Vec4 quaternion_from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 n = axis.normalized();
  const double s = std::sin(0.5 * angle);
  return Vec4(std::cos(0.5 * angle), n.x() * s, n.y() * s, n.z() * s);
}

Mat3 covariance_from_scale_rotation(const Vec3& scale, const Vec4& rotation) {
  if (!scale.allFinite() || !rotation.allFinite()) {
    throw InvalidParameter("covariance: non-finite scale or rotation");
  }
  if ((scale.array() <= 0.0).any()) {
    throw InvalidParameter("covariance: scale must be strictly positive");
  }
  if (rotation.norm() == 0.0) {
    throw InvalidParameter("covariance: zero quaternion");
  }
  const Mat3 m = rotation_matrix(rotation);
  const Mat3 ms = m * scale.asDiagonal();
  Mat3 sigma = ms * ms.transpose();
  // Exact symmetry; the product above can differ in the last ulp.
  return 0.5 * (sigma + sigma.transpose());
}

Gaussian Gaussian::from_values(const Vec3& center, const Vec3& scale, const Vec4& rotation,
                               double opacity, const Vec3& color) {
  if ((scale.array() <= 0.0).any()) {
    throw InvalidParameter("Gaussian: scale must be strictly positive");
  }
  Gaussian g;
  g.center = center;
  g.log_scale = scale.array().log();
  g.rotation = rotation.normalized();
  g.opacity_logit = logit(opacity);
  g.color = color;
  return g;
}

bool Gaussian::is_finite() const {
  return center.allFinite() && log_scale.allFinite() && rotation.allFinite() &&
         std::isfinite(opacity_logit) && color.allFinite() && rotation.norm() > 0.0;
}

Eigen::VectorXd pack_gaussians(std::span<const Gaussian> gaussians) {
  Eigen::VectorXd params(static_cast<Eigen::Index>(gaussians.size() * param::kCount));
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const Gaussian& g = gaussians[i];
    auto block = params.segment(static_cast<Eigen::Index>(i * param::kCount), param::kCount);
    block.segment<3>(param::kCenter) = g.center;
    block.segment<3>(param::kLogScale) = g.log_scale;
    block.segment<4>(param::kRotation) = g.rotation;
    block[param::kOpacity] = g.opacity_logit;
    block.segment<3>(param::kColor) = g.color;
  }
  return params;
}

std::vector<Gaussian> unpack_gaussians(const Eigen::VectorXd& params) {
  if (params.size() % static_cast<Eigen::Index>(param::kCount) != 0) {
    throw DimensionMismatch("unpack_gaussians: parameter vector length " +
                            std::to_string(params.size()) + " is not a multiple of " +
                            std::to_string(param::kCount));
  }
  std::vector<Gaussian> out(static_cast<std::size_t>(params.size()) / param::kCount);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto block = params.segment(static_cast<Eigen::Index>(i * param::kCount), param::kCount);
    Gaussian& g = out[i];
    g.center = block.segment<3>(param::kCenter);
    g.log_scale = block.segment<3>(param::kLogScale);
    g.rotation = block.segment<4>(param::kRotation);
    g.opacity_logit = block[param::kOpacity];
    g.color = block.segment<3>(param::kColor);
  }
  return out;
}

void Camera::validate() const {
  if (width <= 0 || height <= 0) {
    throw InvalidParameter("camera: width and height must be positive");
  }
  if (!K.allFinite() || !R.allFinite() || !T.allFinite()) {
    throw InvalidParameter("camera: non-finite entries");
  }
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho >= 1e-9) {
    throw InvalidParameter("camera: rotation is not orthonormal (max deviation " +
                           std::to_string(ortho) + ")");
  }
  if (K(1, 0) != 0.0 || K(2, 0) != 0.0 || K(2, 1) != 0.0) {
    throw InvalidParameter("camera: intrinsics must be upper-triangular");
  }
  if (K(0, 0) <= 0.0 || K(1, 1) <= 0.0) {
    throw InvalidParameter("camera: focal lengths must be positive");
  }
  if (std::abs(K(2, 2) - 1.0) > 1e-12) {
    throw InvalidParameter("camera: K(2,2) must be 1");
  }
}

Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up, const Mat3& K,
                      int width, int height) {
  const Vec3 forward = (target - eye).normalized();
  // Image y grows downward, so the camera's y axis points along -up.
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right).normalized();
  Camera cam;
  cam.R.row(0) = right.transpose();
  cam.R.row(1) = down.transpose();
  cam.R.row(2) = forward.transpose();
  cam.T = -cam.R * eye;
  cam.K = K;
  cam.width = width;
  cam.height = height;
  return cam;
}

PointProjection project_point(const Camera& camera, const Vec3& point) {
  if (!point.allFinite()) {
    throw InvalidParameter("project_point: non-finite point");
  }
  const Vec3 pc = camera.to_camera(point);
  PointProjection out;
  out.depth = pc.z();
  if (std::abs(pc.z()) < 1e-12) {
    return out;
  }
  const Vec3 h = camera.K * pc;
  out.pixel = Vec2(h.x() / h.z(), h.y() / h.z());
  return out;
}

void SparsePointSet::validate() const {
  if (reproj_error) {
    if (reproj_error->size() != points.size()) {
      throw DimensionMismatch("sparse points: reproj_error length differs from point count");
    }
    for (double e : *reproj_error) {
      if (!(e >= 0.0) || !std::isfinite(e)) {
        throw InvalidParameter("sparse points: reprojection errors must be finite and >= 0");
      }
    }
  }
  if (colors && colors->size() != points.size()) {
    throw DimensionMismatch("sparse points: color count differs from point count");
  }
}

}  // namespace confsplat
