#include "confsplat/losses.hpp"

#include <cmath>

#include "confsplat/errors.hpp"

namespace confsplat {

void LossConfig::validate() const {
  if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) {
    throw InvalidParameter("losses: lambda_max must be a finite value >= 0");
  }
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw InvalidParameter("losses: k must be positive");
  }
  if (!(lambda_dssim >= 0.0 && lambda_dssim <= 1.0)) {
    throw InvalidParameter("losses: lambda_dssim must lie in [0, 1]");
  }
  if (ssim_window < 1 || ssim_window % 2 == 0 || !(ssim_sigma > 0.0) || !(ssim_c1 > 0.0) ||
      !(ssim_c2 > 0.0)) {
    throw InvalidParameter("losses: invalid SSIM window or constants");
  }
}

DepthLoss depth_loss(const Raster& rendered, const Raster& estimated, const Raster& confidence) {
  rendered.require_same_shape(estimated, "depth_loss");
  rendered.require_same_shape(confidence, "depth_loss");
  if (rendered.channels() != 1) {
    throw DimensionMismatch("depth_loss: depth rasters must have one channel");
  }
  DepthLoss out;
  out.grad = Raster(rendered.width(), rendered.height(), 1);
  double sum = 0.0;
  for (std::size_t p = 0; p < rendered.pixel_count(); ++p) {
    if (rendered.valid(p) && estimated.valid(p) && confidence.valid(p)) {
      ++out.count;
      sum += confidence.data()[p] * std::abs(rendered.data()[p] - estimated.data()[p]);
    }
  }
  if (out.count == 0) {
    return out;
  }
  const double n = static_cast<double>(out.count);
  out.value = sum / n;
  for (std::size_t p = 0; p < rendered.pixel_count(); ++p) {
    if (rendered.valid(p) && estimated.valid(p) && confidence.valid(p)) {
      const double r = rendered.data()[p] - estimated.data()[p];
      const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      out.grad.data()[p] = confidence.data()[p] * sign / n;
    }
  }
  return out;
}

double adaptive_weight(double alignment_loss, const LossConfig& config) {
  if (!(alignment_loss >= 0.0)) {
    throw InvalidParameter("adaptive_weight: alignment loss must be >= 0");
  }
  return config.lambda_max * std::exp(-config.k * alignment_loss);
}

ImageLoss image_loss(const Raster& pred, const Raster& gt, const LossConfig& config) {
  pred.require_same_shape(gt, "image_loss");
  ImageLoss out;
  out.grad = Raster(pred.width(), pred.height(), pred.channels());
  const auto pv = pred.data();
  const auto gv = gt.data();
  const double n = static_cast<double>(pv.size());
  const double l1_weight = 1.0 - config.lambda_dssim;
  double l1 = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double r = pv[i] - gv[i];
    l1 += std::abs(r);
    const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    out.grad.data()[i] = l1_weight * sign / n;
  }
  out.l1 = l1 / n;
  out.value = l1_weight * out.l1;
  if (config.lambda_dssim > 0.0) {
    const SsimGradient s = ssim_with_gradient(pred, gt, config.ssim_params());
    out.ssim = s.value;
    out.value += config.lambda_dssim * (1.0 - s.value);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      out.grad.data()[i] -= config.lambda_dssim * s.grad.data()[i];
    }
  }
  return out;
}

double total_loss(double image_term, double depth_term, double lambda_d) {
  return image_term + lambda_d * depth_term;
}

}  // namespace confsplat
