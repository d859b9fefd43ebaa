#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace confsplat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;  // quaternion, (w, x, y, z)
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

double sigmoid(double x);
double logit(double p);

/// Rotation matrix of a quaternion (w, x, y, z). The quaternion is normalized first.
Mat3 rotation_matrix(const Vec4& q);

/// Hamilton product a * b.
Vec4 quaternion_multiply(const Vec4& a, const Vec4& b);

/// Unit quaternion for a rotation of `angle` radians about `axis`.
Vec4 quaternion_from_axis_angle(const Vec3& axis, double angle);

/// Sigma = M diag(s)^2 M^T for rotation M of `rotation`.
/// Throws InvalidParameter on non-finite or non-positive input.
Mat3 covariance_from_scale_rotation(const Vec3& scale, const Vec4& rotation);

/// One anisotropic 3D Gaussian in its optimizer parameterization.
///
/// Scale is stored as log-scale, opacity as a pre-sigmoid logit and the rotation
/// as a raw quaternion; the accessors return the constrained values.
struct Gaussian {
  Vec3 center = Vec3::Zero();
  Vec3 log_scale = Vec3::Zero();
  Vec4 rotation = Vec4(1.0, 0.0, 0.0, 0.0);
  double opacity_logit = 0.0;
  Vec3 color = Vec3::Constant(0.5);

  static Gaussian from_values(const Vec3& center, const Vec3& scale, const Vec4& rotation,
                              double opacity, const Vec3& color);

  Vec3 scale() const { return log_scale.array().exp(); }
  Vec4 unit_rotation() const { return rotation.normalized(); }
  double opacity() const { return sigmoid(opacity_logit); }
  Mat3 covariance() const { return covariance_from_scale_rotation(scale(), unit_rotation()); }
  bool is_finite() const;
};

/// Layout of one Gaussian inside a flat parameter vector.
namespace param {
inline constexpr std::size_t kCenter = 0;
inline constexpr std::size_t kLogScale = 3;
inline constexpr std::size_t kRotation = 6;
inline constexpr std::size_t kOpacity = 10;
inline constexpr std::size_t kColor = 11;
inline constexpr std::size_t kCount = 14;
}  // namespace param

Eigen::VectorXd pack_gaussians(std::span<const Gaussian> gaussians);
std::vector<Gaussian> unpack_gaussians(const Eigen::VectorXd& params);

/// Pinhole camera: pixel ~ K (R X + T). z-forward, pixel centers at integer coordinates.
struct Camera {
  Mat3 K = Mat3::Identity();
  Mat3 R = Mat3::Identity();
  Vec3 T = Vec3::Zero();
  int width = 1;
  int height = 1;

  /// Throws InvalidParameter when R is not orthonormal, K is not an upper-triangular
  /// pinhole matrix with positive focal lengths, or the size is not positive.
  void validate() const;

  Vec3 to_camera(const Vec3& world) const { return R * world + T; }
  Vec3 position() const { return -R.transpose() * T; }
  double fx() const { return K(0, 0); }
  double fy() const { return K(1, 1); }
};

/// Camera at `eye` looking at `target`; `up` disambiguates roll.
Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up, const Mat3& K,
                      int width, int height);

struct PointProjection {
  std::optional<Vec2> pixel;  // empty when the depth is degenerate
  double depth = 0.0;
  bool behind_camera() const { return !pixel || depth < 0.0; }
};

PointProjection project_point(const Camera& camera, const Vec3& point);

/// SfM-style sparse points with optional per-point reprojection error and color.
struct SparsePointSet {
  std::vector<Vec3> points;
  std::optional<std::vector<double>> reproj_error;
  std::optional<std::vector<Vec3>> colors;

  std::size_t size() const { return points.size(); }
  void validate() const;
};

}  // namespace confsplat
