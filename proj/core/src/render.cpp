#include "confsplat/render.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "confsplat/errors.hpp"

namespace confsplat {
namespace {

using namespace render_constants;

// Flat per-view record for the blending loops.
struct Splat {
  std::size_t index;  // position in the caller's Gaussian list
  double mx, my;
  double a, b, c;  // conic [[a, b], [b, c]]
  double opacity;
  double depth;
  std::array<double, 3> color;
};

void check_finite(std::span<const Gaussian> gaussians) {
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    if (!gaussians[i].is_finite()) {
      throw InvalidParameter("render: Gaussian " + std::to_string(i) +
                             " has a non-finite or degenerate parameter");
    }
  }
}

struct ViewSetup {
  std::vector<ProjectedGaussian> projected;  // aligned with splats
  std::vector<Splat> splats;                 // sorted front to back
};

ViewSetup prepare_view(std::span<const Gaussian> gaussians, const Camera& camera) {
  camera.validate();
  check_finite(gaussians);

  std::vector<std::pair<std::size_t, ProjectedGaussian>> visible;
  visible.reserve(gaussians.size());
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    if (auto pg = project_gaussian(gaussians[i], camera)) {
      visible.emplace_back(i, *pg);
    }
  }
  std::stable_sort(visible.begin(), visible.end(), [](const auto& l, const auto& r) {
    return l.second.depth < r.second.depth;
  });

  ViewSetup setup;
  setup.projected.reserve(visible.size());
  setup.splats.reserve(visible.size());
  for (const auto& [index, pg] : visible) {
    setup.splats.push_back(Splat{index, pg.mean.x(), pg.mean.y(), pg.conic(0, 0),
                                 pg.conic(0, 1), pg.conic(1, 1), pg.opacity, pg.depth,
                                 {pg.color.x(), pg.color.y(), pg.color.z()}});
    setup.projected.push_back(pg);
  }
  return setup;
}

// One blended term at one pixel.
struct Contribution {
  std::size_t splat;
  double dx, dy;
  double gauss;         // exp(power)
  double alpha;         // effective alpha after clamp
  bool clamped;
  double transmittance;  // T_j before this term
};

// Runs the front-to-back loop at one pixel, optionally recording contributions.
template <bool kRecord>
void blend_pixel(std::span<const Splat> splats, double px, double py, double* color,
                 double& depth_num, double& weight_sum, std::vector<Contribution>* record) {
  double transmittance = 1.0;
  for (std::size_t j = 0; j < splats.size(); ++j) {
    const Splat& s = splats[j];
    const double dx = px - s.mx;
    const double dy = py - s.my;
    const double power = -0.5 * (s.a * dx * dx + 2.0 * s.b * dx * dy + s.c * dy * dy);
    const double gauss = std::exp(power);
    double alpha = s.opacity * gauss;
    const bool clamped = alpha >= kMaxAlpha;
    if (clamped) {
      alpha = kMaxAlpha;
    }
    const double w = alpha * transmittance;
    color[0] += s.color[0] * w;
    color[1] += s.color[1] * w;
    color[2] += s.color[2] * w;
    depth_num += s.depth * w;
    weight_sum += w;
    if constexpr (kRecord) {
      record->push_back(Contribution{j, dx, dy, gauss, alpha, clamped, transmittance});
    }
    transmittance *= 1.0 - alpha;
    if (transmittance < kMinTransmittance) {
      break;
    }
  }
}

// Screen-space cotangents accumulated per visible splat.
struct SplatGrad {
  double mean[2];
  double conic[3];  // d/da, d/db, d/dc with b counted once (appears twice in the form)
  double opacity;
  double color[3];
  double depth;
};

// Cotangent of a unit quaternion given the cotangent of its rotation matrix.
Vec4 quaternion_cotangent(const Mat3& gm, const Vec4& q) {
  Vec4 out;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  // d m_rc / d (w, x, y, z)
  const double g00 = gm(0, 0), g01 = gm(0, 1), g02 = gm(0, 2);
  const double g10 = gm(1, 0), g11 = gm(1, 1), g12 = gm(1, 2);
  const double g20 = gm(2, 0), g21 = gm(2, 1), g22 = gm(2, 2);
  out[0] = 2.0 * (-z * g01 + y * g02 + z * g10 - x * g12 - y * g20 + x * g21);
  out[1] = 2.0 * (y * g01 + z * g02 + y * g10 - 2.0 * x * g11 - w * g12 + z * g20 + w * g21 -
                  2.0 * x * g22);
  out[2] = 2.0 * (-2.0 * y * g00 + x * g01 + w * g02 + x * g10 + z * g12 - w * g20 + z * g21 -
                  2.0 * y * g22);
  out[3] = 2.0 * (-2.0 * z * g00 - w * g01 + x * g02 + w * g10 - 2.0 * z * g11 + y * g12 +
                  x * g20 + y * g21);
  return out;
}

// Chains screen-space cotangents of one splat back to its Gaussian parameters.
void backprop_projection(const Gaussian& g, const ProjectedGaussian& pg, const Camera& camera,
                         const SplatGrad& sg, double* out) {
  // Color and opacity.
  const double o = pg.opacity;
  out[param::kOpacity] += sg.opacity * o * (1.0 - o);
  for (int k = 0; k < 3; ++k) {
    out[param::kColor + k] += sg.color[k];
  }

  // Conic -> 2D covariance: dL/dS2 = -Q G Q with G the symmetric conic cotangent.
  Mat2 gq;
  gq << sg.conic[0], 0.5 * sg.conic[1], 0.5 * sg.conic[1], sg.conic[2];
  const Mat2 g_cov2 = -pg.conic * gq * pg.conic;

  // S2 = J W S W^T J^T + dilation.
  const Mat3& W = camera.R;
  const Mat23 TW = pg.jacobian * W;
  const Mat3 g_cov3 = TW.transpose() * g_cov2 * TW;
  const Mat23 g_tw = 2.0 * g_cov2 * TW * pg.covariance3d;
  const Mat23 g_j = g_tw * W.transpose();

  // Camera-space point cotangent from the mean, the Jacobian and the depth.
  const double fx = camera.K(0, 0), skew = camera.K(0, 1), fy = camera.K(1, 1);
  const double x = pg.camera_point.x(), y = pg.camera_point.y(), z = pg.camera_point.z();
  const double iz = 1.0 / z, iz2 = iz * iz, iz3 = iz2 * iz;
  const double gu = sg.mean[0], gv = sg.mean[1];

  Vec3 gt;
  gt.x() = gu * fx * iz;
  gt.y() = gu * skew * iz + gv * fy * iz;
  gt.z() = -gu * (fx * x + skew * y) * iz2 - gv * fy * y * iz2 + sg.depth;

  gt.x() += g_j(0, 2) * (-fx * iz2);
  gt.y() += g_j(0, 2) * (-skew * iz2) + g_j(1, 2) * (-fy * iz2);
  gt.z() += g_j(0, 0) * (-fx * iz2) + g_j(0, 1) * (-skew * iz2) +
            g_j(0, 2) * (2.0 * (fx * x + skew * y) * iz3) + g_j(1, 1) * (-fy * iz2) +
            g_j(1, 2) * (2.0 * fy * y * iz3);

  const Vec3 g_center = W.transpose() * gt;
  for (int k = 0; k < 3; ++k) {
    out[param::kCenter + k] += g_center[k];
  }

  // S3 = M diag(s^2) M^T.
  const Vec4 qn = g.unit_rotation();
  const Mat3 M = rotation_matrix(qn);
  const Vec3 s = g.scale();
  const Vec3 s2 = s.cwiseProduct(s);
  const Mat3 mtgm = M.transpose() * g_cov3 * M;
  for (int k = 0; k < 3; ++k) {
    out[param::kLogScale + k] += 2.0 * s2[k] * mtgm(k, k);
  }
  const Mat3 g_m = 2.0 * g_cov3 * M * s2.asDiagonal();
  const Vec4 g_qn = quaternion_cotangent(g_m, qn);
  const double qnorm = g.rotation.norm();
  const Vec4 g_q = (g_qn - qn * qn.dot(g_qn)) / qnorm;
  for (int k = 0; k < 4; ++k) {
    out[param::kRotation + k] += g_q[k];
  }
}

}  // namespace

std::optional<ProjectedGaussian> project_gaussian(const Gaussian& g, const Camera& camera) {
  const Vec3 t = camera.to_camera(g.center);
  if (!(t.z() > kNearPlane)) {
    return std::nullopt;
  }
  const double fx = camera.K(0, 0), skew = camera.K(0, 1), fy = camera.K(1, 1);
  const double iz = 1.0 / t.z();

  ProjectedGaussian pg;
  pg.camera_point = t;
  pg.depth = t.z();
  pg.mean = Vec2((fx * t.x() + skew * t.y()) * iz + camera.K(0, 2),
                 fy * t.y() * iz + camera.K(1, 2));
  pg.jacobian << fx * iz, skew * iz, -(fx * t.x() + skew * t.y()) * iz * iz,  //
      0.0, fy * iz, -fy * t.y() * iz * iz;
  pg.covariance3d = g.covariance();
  const Mat23 tw = pg.jacobian * camera.R;
  pg.cov = tw * pg.covariance3d * tw.transpose();
  pg.cov = 0.5 * (pg.cov + pg.cov.transpose()).eval();
  pg.cov(0, 0) += kCovDilation;
  pg.cov(1, 1) += kCovDilation;

  const double det = pg.cov.determinant();
  if (!(det > 0.0)) {
    return std::nullopt;
  }
  pg.conic << pg.cov(1, 1) / det, -pg.cov(0, 1) / det, -pg.cov(1, 0) / det, pg.cov(0, 0) / det;

  const double half_trace = 0.5 * (pg.cov(0, 0) + pg.cov(1, 1));
  const double lambda_max =
      half_trace + std::sqrt(std::max(0.0, half_trace * half_trace - det));
  const double radius = kCullSigma * std::sqrt(lambda_max);
  if (pg.mean.x() + radius < 0.0 || pg.mean.x() - radius > camera.width - 1 ||
      pg.mean.y() + radius < 0.0 || pg.mean.y() - radius > camera.height - 1) {
    return std::nullopt;
  }

  pg.opacity = g.opacity();
  pg.color = g.color;
  return pg;
}

RenderOutput render(std::span<const Gaussian> gaussians, const Camera& camera) {
  const ViewSetup setup = prepare_view(gaussians, camera);
  const int width = camera.width;
  const int height = camera.height;

  RenderOutput out{Raster(width, height, 3), Raster(width, height, 1),
                   Raster(width, height, 1)};
  const std::span<const Splat> splats(setup.splats);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double color[3] = {0.0, 0.0, 0.0};
      double depth_num = 0.0;
      double weight_sum = 0.0;
      blend_pixel<false>(splats, x, y, color, depth_num, weight_sum, nullptr);
      for (int c = 0; c < 3; ++c) {
        out.color.at(x, y, c) = color[c];
      }
      out.alpha_sum.at(x, y) = weight_sum;
      if (weight_sum > kCoverageFloor) {
        out.depth.at(x, y) = depth_num / weight_sum;
      } else {
        out.depth.invalidate(x, y);
      }
    }
  }
  return out;
}

Eigen::VectorXd render_backward(std::span<const Gaussian> gaussians, const Camera& camera,
                                const Raster& grad_color, const Raster& grad_depth) {
  if (grad_color.width() != camera.width || grad_color.height() != camera.height ||
      grad_color.channels() != 3) {
    throw DimensionMismatch("render_backward: color cotangent must be 3-channel " +
                            std::to_string(camera.width) + "x" +
                            std::to_string(camera.height));
  }
  if (grad_depth.width() != camera.width || grad_depth.height() != camera.height ||
      grad_depth.channels() != 1) {
    throw DimensionMismatch("render_backward: depth cotangent must be 1-channel " +
                            std::to_string(camera.width) + "x" +
                            std::to_string(camera.height));
  }

  const ViewSetup setup = prepare_view(gaussians, camera);
  const std::span<const Splat> splats(setup.splats);
  const std::size_t n = splats.size();
  const int width = camera.width;
  const int height = camera.height;

  // Per-row partial sums, reduced in row order for reproducibility.
  std::vector<SplatGrad> rows(static_cast<std::size_t>(height) * n, SplatGrad{});

#pragma omp parallel
  {
    std::vector<Contribution> contribs;
    contribs.reserve(n);
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) {
      SplatGrad* row = rows.data() + static_cast<std::size_t>(y) * n;
      for (int x = 0; x < width; ++x) {
        contribs.clear();
        double color[3] = {0.0, 0.0, 0.0};
        double depth_num = 0.0;
        double weight_sum = 0.0;
        blend_pixel<true>(splats, x, y, color, depth_num, weight_sum, &contribs);
        if (contribs.empty()) {
          continue;
        }

        const double gc[3] = {grad_color.at(x, y, 0), grad_color.at(x, y, 1),
                              grad_color.at(x, y, 2)};
        const bool depth_valid = weight_sum > kCoverageFloor;
        double g_num = 0.0;  // dL/d(sum d_j w_j)
        double g_den = 0.0;  // dL/d(sum w_j)
        if (depth_valid) {
          const double gd = grad_depth.at(x, y);
          g_num = gd / weight_sum;
          g_den = -gd * (depth_num / weight_sum) / weight_sum;
        }

        // Suffix sums over terms behind the current one.
        double after_color[3] = {0.0, 0.0, 0.0};
        double after_depth = 0.0;
        double after_weight = 0.0;
        for (std::size_t k = contribs.size(); k-- > 0;) {
          const Contribution& ct = contribs[k];
          const Splat& s = splats[ct.splat];
          SplatGrad& sg = row[ct.splat];
          const double w = ct.alpha * ct.transmittance;
          const double inv_keep = 1.0 / (1.0 - ct.alpha);

          double g_alpha = 0.0;
          for (int c = 0; c < 3; ++c) {
            sg.color[c] += gc[c] * w;
            g_alpha += gc[c] * (s.color[c] * ct.transmittance - after_color[c] * inv_keep);
          }
          sg.depth += g_num * w;
          g_alpha += g_num * (s.depth * ct.transmittance - after_depth * inv_keep);
          g_alpha += g_den * (ct.transmittance - after_weight * inv_keep);

          for (int c = 0; c < 3; ++c) {
            after_color[c] += s.color[c] * w;
          }
          after_depth += s.depth * w;
          after_weight += w;

          if (ct.clamped) {
            continue;
          }
          sg.opacity += g_alpha * ct.gauss;
          const double g_power = g_alpha * s.opacity * ct.gauss;
          // power = -1/2 d^T Q d with d = pixel - mean.
          sg.mean[0] += g_power * (s.a * ct.dx + s.b * ct.dy);
          sg.mean[1] += g_power * (s.b * ct.dx + s.c * ct.dy);
          sg.conic[0] += g_power * (-0.5 * ct.dx * ct.dx);
          sg.conic[1] += g_power * (-ct.dx * ct.dy);
          sg.conic[2] += g_power * (-0.5 * ct.dy * ct.dy);
        }
      }
    }
  }

  std::vector<SplatGrad> totals(n, SplatGrad{});
  for (int y = 0; y < height; ++y) {
    const SplatGrad* row = rows.data() + static_cast<std::size_t>(y) * n;
    for (std::size_t j = 0; j < n; ++j) {
      SplatGrad& t = totals[j];
      const SplatGrad& r = row[j];
      t.mean[0] += r.mean[0];
      t.mean[1] += r.mean[1];
      for (int k = 0; k < 3; ++k) {
        t.conic[k] += r.conic[k];
        t.color[k] += r.color[k];
      }
      t.opacity += r.opacity;
      t.depth += r.depth;
    }
  }

  Eigen::VectorXd grads = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(gaussians.size() * param::kCount));
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t gi = splats[j].index;
    backprop_projection(gaussians[gi], setup.projected[j], camera, totals[j],
                        grads.data() + gi * param::kCount);
  }
  return grads;
}

}  // namespace confsplat
