#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "confsplat/errors.hpp"
#include "confsplat/losses.hpp"
#include "confsplat/ssim.hpp"
#include "oracles.hpp"

namespace confsplat {
namespace {

// Direct 2D-window SSIM with zero padding, per channel, averaged.
double reference_ssim(const Raster& a, const Raster& b, int window = 11, double sigma = 1.5,
                      double c1 = 1e-4, double c2 = 9e-4) {
  const int r = window / 2;
  std::vector<double> g(window * window);
  double sum = 0.0;
  for (int j = -r; j <= r; ++j) {
    for (int i = -r; i <= r; ++i) {
      g[(j + r) * window + i + r] = std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
      sum += g[(j + r) * window + i + r];
    }
  }
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
        for (int j = -r; j <= r; ++j) {
          for (int i = -r; i <= r; ++i) {
            const int px = x + i, py = y + j;
            if (px < 0 || py < 0 || px >= a.width() || py >= a.height()) continue;
            const double wgt = g[(j + r) * window + i + r] / sum;
            const double va = a.at(px, py, c), vb = b.at(px, py, c);
            mx += wgt * va;
            my += wgt * vb;
            xx += wgt * va * va;
            yy += wgt * vb * vb;
            xy += wgt * va * vb;
          }
        }
        const double sx = xx - mx * mx, sy = yy - my * my, sxy = xy - mx * my;
        total += (2 * mx * my + c1) * (2 * sxy + c2) / ((mx * mx + my * my + c1) * (sx + sy + c2));
      }
    }
  }
  return total / (static_cast<double>(a.pixel_count()) * a.channels());
}

Raster random_image(std::mt19937_64& rng, int w, int h, int channels, double lo = 0.0,
                    double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Raster img(w, h, channels);
  for (double& v : img.data()) v = u(rng);
  return img;
}

TEST(Ssim, MatchesDirectWindowOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Raster a = random_image(rng, 13 + trial, 9 + 2 * trial, 3);
    const Raster b = random_image(rng, 13 + trial, 9 + 2 * trial, 3);
    EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-12);
  }
}

TEST(Ssim, SelfSimilarityAndSymmetry) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Raster a = random_image(rng, 12, 12, trial % 2 ? 1 : 3);
    const Raster b = random_image(rng, 12, 12, trial % 2 ? 1 : 3);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-9);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-9);
  }
}

TEST(Ssim, RejectsBadWindow) {
  const Raster a(8, 8, 1);
  EXPECT_THROW(ssim(a, a, SsimParams{10, 1.5, 1e-4, 9e-4}), InvalidParameter);
  EXPECT_THROW(ssim(a, Raster(8, 7, 1)), DimensionMismatch);
}

TEST(DepthLoss, ZeroResidual) {
  const Raster d(5, 4, 1, 2.0), c(5, 4, 1, 0.7);
  const DepthLoss l = depth_loss(d, d, c);
  EXPECT_EQ(l.value, 0.0);
  EXPECT_EQ(l.count, 20u);
  for (double v : l.grad.data()) EXPECT_EQ(v, 0.0);
}

TEST(DepthLoss, UniformResidual) {
  Raster r(4, 4, 1, 2.5), e(4, 4, 1, 2.0);
  r.invalidate(1, 1);
  const DepthLoss l = depth_loss(r, e, Raster(4, 4, 1, 1.0));
  EXPECT_DOUBLE_EQ(l.value, 0.5);
  EXPECT_EQ(l.count, 15u);
  EXPECT_EQ(l.grad.at(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(l.grad.at(0, 0), 1.0 / 15.0);
}

TEST(DepthLoss, ZeroConfidencePixelContributesNothing) {
  Raster r(2, 1, 1), e(2, 1, 1), c(2, 1, 1);
  r.at(0, 0) = 1.4;
  e.at(0, 0) = 1.0;
  r.at(1, 0) = 0.0;
  e.at(1, 0) = 100.0;
  c.at(0, 0) = 1.0;
  c.at(1, 0) = 0.0;
  const DepthLoss l = depth_loss(r, e, c);
  EXPECT_NEAR(l.value, 0.2, 1e-15);
  EXPECT_EQ(l.grad.at(0, 0), 0.5);
  EXPECT_EQ(l.grad.at(1, 0), 0.0);
}

TEST(DepthLoss, EmptyOmegaIsFlagged) {
  const DepthLoss l = depth_loss(Raster(3, 3, 1, 0.0, false), Raster(3, 3, 1), Raster(3, 3, 1));
  EXPECT_TRUE(l.empty());
  EXPECT_EQ(l.value, 0.0);
  EXPECT_THROW(depth_loss(Raster(3, 3, 1), Raster(3, 2, 1), Raster(3, 3, 1)), DimensionMismatch);
}

TEST(DepthLoss, HomogeneousAndPermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster r(6, 6, 1), e(6, 6, 1), c(6, 6, 1);
  for (std::size_t p = 0; p < 36; ++p) {
    r.data()[p] = 1.0 + u(rng);
    e.data()[p] = 1.0 + u(rng);
    c.data()[p] = u(rng);
  }
  const double base = depth_loss(r, e, c).value;
  Raster scaled = r;
  for (std::size_t p = 0; p < 36; ++p) {
    scaled.data()[p] = e.data()[p] + 3.0 * (r.data()[p] - e.data()[p]);
  }
  EXPECT_NEAR(depth_loss(scaled, e, c).value, 3.0 * base, 1e-12);

  // Reverse pixel order in all three rasters.
  Raster rr = r, er = e, cr = c;
  for (std::size_t p = 0; p < 36; ++p) {
    rr.data()[p] = r.data()[35 - p];
    er.data()[p] = e.data()[35 - p];
    cr.data()[p] = c.data()[35 - p];
  }
  EXPECT_NEAR(depth_loss(rr, er, cr).value, base, 1e-14);
}

TEST(AdaptiveWeight, Values) {
  const LossConfig cfg;
  EXPECT_EQ(adaptive_weight(0.0, cfg), 0.6);
  EXPECT_NEAR(adaptive_weight(0.01, cfg), 0.6 * std::exp(-1.5), 1e-12);
  EXPECT_NEAR(adaptive_weight(0.01, cfg), 0.13388, 1e-5);
  EXPECT_LT(adaptive_weight(1.0, cfg), 1e-60);
  EXPECT_GT(adaptive_weight(1.0, cfg), 0.0);
  EXPECT_THROW(adaptive_weight(-1e-3, cfg), InvalidParameter);
}

TEST(AdaptiveWeight, StrictlyDecreasingAndBounded) {
  const LossConfig cfg;
  double prev = adaptive_weight(0.0, cfg);
  for (int i = 1; i <= 200; ++i) {
    const double v = adaptive_weight(i * 1e-3, cfg);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, cfg.lambda_max);
    prev = v;
  }
}

TEST(ImageLoss, IdenticalIsZero) {
  std::mt19937_64 rng(3);
  const Raster a = random_image(rng, 10, 10, 3);
  const ImageLoss l = image_loss(a, a);
  EXPECT_NEAR(l.value, 0.0, 1e-12);
}

TEST(ImageLoss, ConstantOffset) {
  std::mt19937_64 rng(4);
  const Raster gt = random_image(rng, 16, 16, 3, 0.1, 0.8);
  Raster pred = gt;
  for (double& v : pred.data()) v += 0.1;
  const LossConfig cfg;
  const ImageLoss l = image_loss(pred, gt, cfg);
  EXPECT_NEAR(l.l1, 0.1, 1e-12);
  const double expected = 0.1 * (1.0 - cfg.lambda_dssim) + cfg.lambda_dssim * (1.0 - reference_ssim(pred, gt));
  EXPECT_NEAR(l.value, expected, 1e-12);
}

TEST(ImageLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  const LossConfig cfg;
  for (int trial = 0; trial < 3; ++trial) {
    const Raster gt = random_image(rng, 16, 16, 3);
    const Raster pred = random_image(rng, 16, 16, 3);
    const ImageLoss l = image_loss(pred, gt, cfg);
    Eigen::VectorXd x(pred.data().size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = pred.data()[i];
    const auto f = [&](const Eigen::VectorXd& v) {
      Raster p = pred;
      for (Eigen::Index i = 0; i < v.size(); ++i) p.data()[i] = v[i];
      return image_loss(p, gt, cfg).value;
    };
    const Eigen::VectorXd fd = testing::central_difference(f, x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      EXPECT_TRUE(testing::gradients_agree(l.grad.data()[i], fd[i], 1e-3, 1e-8))
          << "i=" << i << " analytic " << l.grad.data()[i] << " fd " << fd[i];
    }
  }
}

TEST(TotalLoss, Arithmetic) {
  EXPECT_NEAR(total_loss(0.3, 0.2, 0.6), 0.42, 1e-15);
  EXPECT_EQ(total_loss(0.3, 123.0, 0.0), 0.3);
  EXPECT_NEAR(total_loss(0.25, 0.1, 0.13388), 0.263388, 1e-15);
}

TEST(LossConfig, Validation) {
  EXPECT_NO_THROW(LossConfig{}.validate());
  LossConfig bad;
  bad.lambda_dssim = 1.5;
  EXPECT_THROW(bad.validate(), InvalidParameter);
  bad = LossConfig{};
  bad.k = 0.0;
  EXPECT_THROW(bad.validate(), InvalidParameter);
}

}  // namespace
}  // namespace confsplat
