#include "confsplat/ssim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "confsplat/errors.hpp"

namespace confsplat {
namespace {

std::vector<double> gaussian_window(const SsimParams& p) {
  if (p.window < 1 || p.window % 2 == 0) {
    throw InvalidParameter("ssim: window size must be a positive odd integer");
  }
  if (!(p.sigma > 0.0)) {
    throw InvalidParameter("ssim: sigma must be positive");
  }
  const int r = p.window / 2;
  std::vector<double> k(p.window);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * i * i / (p.sigma * p.sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Single-channel plane with separable zero-padded filtering.
struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, 0.0) {}
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

// The window is symmetric, so this is also the adjoint of itself.
Plane filter(const Plane& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  const int w = in.w, h = in.h;
  Plane tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    const double* src = &in.v[static_cast<std::size_t>(y) * w];
    double* dst = &tmp.v[static_cast<std::size_t>(y) * w];
    for (int i = -r; i <= r; ++i) {
      const double kv = k[i + r];
      const int x0 = std::max(0, -i), x1 = std::min(w, w - i);
      for (int x = x0; x < x1; ++x) dst[x] += kv * src[x + i];
    }
  }
  // Vertical pass as row-wise accumulation.
  for (int y = 0; y < h; ++y) {
    double* dst = &out.v[static_cast<std::size_t>(y) * w];
    for (int i = std::max(-r, -y); i <= std::min(r, h - 1 - y); ++i) {
      const double kv = k[i + r];
      const double* src = &tmp.v[static_cast<std::size_t>(y + i) * w];
      for (int x = 0; x < w; ++x) dst[x] += kv * src[x];
    }
  }
  return out;
}

Plane channel(const Raster& r, int c) {
  Plane p(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) p.at(x, y) = r.at(x, y, c);
  }
  return p;
}

template <bool kGrad>
double evaluate(const Raster& a, const Raster& b, const SsimParams& params, Raster* grad) {
  a.require_same_shape(b, "ssim");
  if (a.empty()) {
    throw DimensionMismatch("ssim: empty image");
  }
  const std::vector<double> k = gaussian_window(params);
  const int w = a.width(), h = a.height();
  const double n = static_cast<double>(a.pixel_count()) * a.channels();
  double total = 0.0;

  for (int c = 0; c < a.channels(); ++c) {
    const Plane x = channel(a, c), y = channel(b, c);
    Plane xx(w, h), yy(w, h), xy(w, h);
    for (std::size_t i = 0; i < x.v.size(); ++i) {
      xx.v[i] = x.v[i] * x.v[i];
      yy.v[i] = y.v[i] * y.v[i];
      xy.v[i] = x.v[i] * y.v[i];
    }
    const Plane mx = filter(x, k), my = filter(y, k);
    const Plane exx = filter(xx, k), eyy = filter(yy, k), exy = filter(xy, k);

    Plane d_mx(w, h), d_exx(w, h), d_exy(w, h);
    for (std::size_t i = 0; i < x.v.size(); ++i) {
      const double ux = mx.v[i], uy = my.v[i];
      const double sxx = exx.v[i] - ux * ux;
      const double syy = eyy.v[i] - uy * uy;
      const double sxy = exy.v[i] - ux * uy;
      const double a1 = 2.0 * ux * uy + params.c1;
      const double a2 = 2.0 * sxy + params.c2;
      const double b1 = ux * ux + uy * uy + params.c1;
      const double b2 = sxx + syy + params.c2;
      const double s = (a1 * a2) / (b1 * b2);
      total += s;
      if constexpr (kGrad) {
        const double inv = 1.0 / (b1 * b2 * n);
        d_mx.v[i] = (2.0 * uy * a2 - 2.0 * uy * a1) * inv - s * (2.0 * ux / b1 - 2.0 * ux / b2) / n;
        d_exx.v[i] = -s / (b2 * n);
        d_exy.v[i] = 2.0 * a1 * inv;
      }
    }
    if constexpr (kGrad) {
      const Plane g_mx = filter(d_mx, k), g_exx = filter(d_exx, k), g_exy = filter(d_exy, k);
      for (int yy_ = 0; yy_ < h; ++yy_) {
        for (int xx_ = 0; xx_ < w; ++xx_) {
          grad->at(xx_, yy_, c) = g_mx.at(xx_, yy_) + 2.0 * x.at(xx_, yy_) * g_exx.at(xx_, yy_) +
                                  y.at(xx_, yy_) * g_exy.at(xx_, yy_);
        }
      }
    }
  }
  return total / n;
}

}  // namespace

double ssim(const Raster& a, const Raster& b, const SsimParams& params) {
  return evaluate<false>(a, b, params, nullptr);
}

SsimGradient ssim_with_gradient(const Raster& a, const Raster& b, const SsimParams& params) {
  SsimGradient out;
  out.grad = Raster(a.width(), a.height(), a.channels());
  out.value = evaluate<true>(a, b, params, &out.grad);
  return out;
}

}  // namespace confsplat
