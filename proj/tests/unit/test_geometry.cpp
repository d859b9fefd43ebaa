#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "confsplat/errors.hpp"
#include "confsplat/geometry.hpp"
#include "oracles.hpp"

namespace confsplat {
namespace {

TEST(Covariance, IdentityScaleAndRotation) {
  const Mat3 sigma = covariance_from_scale_rotation(Vec3(1, 1, 1), Vec4(1, 0, 0, 0));
  EXPECT_LT((sigma - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Covariance, AxisAlignedDiagonal) {
  const Mat3 sigma = covariance_from_scale_rotation(Vec3(2, 1, 1), Vec4(1, 0, 0, 0));
  EXPECT_LT((sigma - Vec3(4, 1, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Covariance, QuarterTurnAboutZ) {
  // Oracle: explicit rotation matrix for +90 degrees about z.
  Mat3 rz;
  rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 expected = rz * Vec3(1, 4, 9).asDiagonal() * rz.transpose();
  const Mat3 sigma = covariance_from_scale_rotation(
      Vec3(1, 2, 3), quaternion_from_axis_angle(Vec3::UnitZ(), std::numbers::pi / 2));
  EXPECT_LT((sigma - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(sigma(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(sigma(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(sigma(2, 2), 9.0, 1e-12);
}

TEST(Covariance, RejectsNonFinite) {
  EXPECT_THROW(covariance_from_scale_rotation(Vec3(NAN, 1, 1), Vec4(1, 0, 0, 0)),
               InvalidParameter);
  EXPECT_THROW(covariance_from_scale_rotation(Vec3(1, 1, 1), Vec4(INFINITY, 0, 0, 0)),
               InvalidParameter);
}

TEST(Covariance, SymmetricPositiveDefiniteAndEquivariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 s(u(rng), u(rng), u(rng));
    const Vec4 q1 = testing::random_unit_quaternion(rng);
    const Vec4 q2 = testing::random_unit_quaternion(rng);
    const Mat3 sigma = covariance_from_scale_rotation(s, q1);
    EXPECT_LT((sigma - sigma.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(sigma);
    EXPECT_GE(eig.eigenvalues().minCoeff(), s.minCoeff() * s.minCoeff() * (1 - 1e-9));

    const Mat3 rotated = covariance_from_scale_rotation(s, quaternion_multiply(q2, q1));
    const Mat3 m2 = rotation_matrix(q2);
    EXPECT_LT((rotated - m2 * sigma * m2.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(GaussianPacking, RoundTripsAllFields) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Gaussian> gs(17);
  for (auto& g : gs) {
    g.center = Vec3(n(rng), n(rng), n(rng));
    g.log_scale = Vec3(n(rng), n(rng), n(rng));
    g.rotation = Vec4(n(rng), n(rng), n(rng), n(rng));
    g.opacity_logit = n(rng);
    g.color = Vec3(n(rng), n(rng), n(rng));
  }
  const auto back = unpack_gaussians(pack_gaussians(gs));
  ASSERT_EQ(back.size(), gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i) {
    EXPECT_LT((back[i].center - gs[i].center).norm(), 1e-9);
    EXPECT_LT((back[i].log_scale - gs[i].log_scale).norm(), 1e-9);
    EXPECT_LT((back[i].rotation - gs[i].rotation).norm(), 1e-9);
    EXPECT_NEAR(back[i].opacity_logit, gs[i].opacity_logit, 1e-9);
    EXPECT_LT((back[i].color - gs[i].color).norm(), 1e-9);
  }
  EXPECT_THROW(unpack_gaussians(Eigen::VectorXd::Zero(15)), DimensionMismatch);
}

TEST(GaussianPacking, ConstrainedAccessors) {
  const Gaussian g = Gaussian::from_values(Vec3(1, 2, 3), Vec3(0.5, 1.0, 2.0),
                                           Vec4(2, 0, 0, 0), 0.25, Vec3(0.1, 0.2, 0.3));
  EXPECT_LT((g.scale() - Vec3(0.5, 1.0, 2.0)).norm(), 1e-12);
  EXPECT_NEAR(g.opacity(), 0.25, 1e-12);
  EXPECT_NEAR(g.unit_rotation().norm(), 1.0, 1e-12);
  EXPECT_THROW(Gaussian::from_values(Vec3::Zero(), Vec3(0, 1, 1), Vec4(1, 0, 0, 0), 0.5,
                                     Vec3::Zero()),
               InvalidParameter);
}

TEST(ProjectPoint, OpticalAxis) {
  Camera cam;
  const auto p = project_point(cam, Vec3(0, 0, 5));
  ASSERT_TRUE(p.pixel.has_value());
  EXPECT_DOUBLE_EQ(p.pixel->x(), 0.0);
  EXPECT_DOUBLE_EQ(p.pixel->y(), 0.0);
  EXPECT_DOUBLE_EQ(p.depth, 5.0);
  EXPECT_FALSE(p.behind_camera());
}

TEST(ProjectPoint, HandProjection) {
  Camera cam;
  cam.K << 100, 0, 50, 0, 100, 50, 0, 0, 1;
  cam.width = cam.height = 100;
  const auto p = project_point(cam, Vec3(1, 0, 2));
  ASSERT_TRUE(p.pixel.has_value());
  // u = 100 * 1 / 2 + 50, v = 100 * 0 / 2 + 50
  EXPECT_NEAR(p.pixel->x(), 100.0, 1e-12);
  EXPECT_NEAR(p.pixel->y(), 50.0, 1e-12);
  EXPECT_DOUBLE_EQ(p.depth, 2.0);
}

TEST(ProjectPoint, BehindAndDegenerate) {
  Camera cam;
  EXPECT_TRUE(project_point(cam, Vec3(0.3, 0.1, -1)).behind_camera());
  const auto degenerate = project_point(cam, Vec3(1, 1, 0));
  EXPECT_FALSE(degenerate.pixel.has_value());
  EXPECT_TRUE(degenerate.behind_camera());
  EXPECT_THROW(project_point(cam, Vec3(NAN, 0, 1)), InvalidParameter);
}

TEST(ProjectPoint, DepthIndependentOfIntrinsics) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Camera a;
  a.R = rotation_matrix(testing::random_unit_quaternion(rng));
  a.T = Vec3(0.1, -0.2, 4.0);
  Camera b = a;
  b.K << 321, 0.5, 17, 0, 299, -3, 0, 0, 1;
  for (int i = 0; i < 50; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    EXPECT_EQ(project_point(a, p).depth, project_point(b, p).depth);
  }
}

TEST(Camera, Validation) {
  Camera cam;
  cam.width = cam.height = 8;
  EXPECT_NO_THROW(cam.validate());
  Camera bad_r = cam;
  bad_r.R(0, 0) = 1.1;
  EXPECT_THROW(bad_r.validate(), InvalidParameter);
  Camera bad_k = cam;
  bad_k.K(1, 0) = 0.2;
  EXPECT_THROW(bad_k.validate(), InvalidParameter);
  Camera bad_f = cam;
  bad_f.K(0, 0) = -1;
  EXPECT_THROW(bad_f.validate(), InvalidParameter);
}

TEST(Camera, LookAtFacesTarget) {
  Mat3 K;
  K << 50, 0, 16, 0, 50, 16, 0, 0, 1;
  const Camera cam = look_at_camera(Vec3(3, 1, 0.5), Vec3::Zero(), Vec3::UnitZ(), K, 32, 32);
  EXPECT_NO_THROW(cam.validate());
  const auto p = project_point(cam, Vec3::Zero());
  EXPECT_NEAR(p.pixel->x(), 16.0, 1e-12);
  EXPECT_NEAR(p.pixel->y(), 16.0, 1e-12);
  EXPECT_NEAR(p.depth, Vec3(3, 1, 0.5).norm(), 1e-12);
  EXPECT_LT((cam.position() - Vec3(3, 1, 0.5)).norm(), 1e-12);
  // World up maps to image up (smaller v).
  EXPECT_LT(project_point(cam, Vec3(0, 0, 0.2)).pixel->y(), 16.0);
}

TEST(SparsePoints, Validation) {
  SparsePointSet s;
  s.points = {Vec3::Zero(), Vec3::Ones()};
  s.reproj_error = std::vector<double>{0.0, 1.0};
  EXPECT_NO_THROW(s.validate());
  s.reproj_error = std::vector<double>{0.0};
  EXPECT_THROW(s.validate(), DimensionMismatch);
  s.reproj_error = std::vector<double>{0.0, -1.0};
  EXPECT_THROW(s.validate(), InvalidParameter);
}

}  // namespace
}  // namespace confsplat
