#include "confsplat/depth_align.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "confsplat/errors.hpp"

namespace confsplat {
namespace {

struct Samples {
  std::vector<double> init;
  std::vector<double> target;
  std::vector<double> weight;
  std::size_t size() const { return init.size(); }
};

struct AffineFit {
  double scale = 1.0;
  double shift = 0.0;
};

// Adam on (scale, shift), run in standardized coordinates: initial depth is
// whitened by its weighted mean/std and steps are measured in target std units.
// The objective is the same up to a positive factor, so the minimizer is unchanged.
class AffineSolver {
 public:
  AffineSolver(const Samples& samples, const std::vector<double>& all_init,
               const AlignConfig& config)
      : samples_(samples), all_init_(all_init), config_(config) {
    double sw = 0.0, mean_x = 0.0, mean_t = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      sw += samples.weight[i];
      mean_x += samples.weight[i] * samples.init[i];
      mean_t += samples.weight[i] * samples.target[i];
    }
    if (!(sw > 0.0)) {
      throw InsufficientConstraints("align_depth: weights sum to zero");
    }
    mean_x /= sw;
    mean_t /= sw;
    double var_x = 0.0, var_t = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      var_x += samples.weight[i] * (samples.init[i] - mean_x) * (samples.init[i] - mean_x);
      var_t += samples.weight[i] * (samples.target[i] - mean_t) * (samples.target[i] - mean_t);
    }
    weight_sum_ = sw;
    x_mean_ = mean_x;
    x_std_ = var_x > 0.0 ? std::sqrt(var_x / sw) : 1.0;
    t_std_ = var_t > 0.0 ? std::sqrt(var_t / sw) : std::max(1.0, std::abs(mean_t));
  }

  // Runs one optimization stage from `start`. `global_step` drives the learning-rate
  // decay across stages.
  AffineFit run(AffineFit start, int& global_step) {
    double a = start.scale * x_std_;
    double b = start.scale * x_mean_ + start.shift;
    double m[2] = {0.0, 0.0};
    double v[2] = {0.0, 0.0};
    double prev = 0.0;
    int calm = 0;
    const double norm = 1.0 / (weight_sum_ * t_std_ * t_std_);

    for (int k = 1; k <= config_.max_steps; ++k) {
      double f = 0.0, ga = 0.0, gb = 0.0;
      for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double z = (samples_.init[i] - x_mean_) / x_std_;
        const double r = samples_.target[i] - (a * z + b);
        const double w = samples_.weight[i];
        f += w * r * r;
        ga -= 2.0 * w * r * z;
        gb -= 2.0 * w * r;
      }
      if (config_.negative_weight > 0.0) {
        for (double x : all_init_) {
          const double z = (x - x_mean_) / x_std_;
          const double neg = std::max(0.0, -(a * z + b));
          f += config_.negative_weight * neg * neg;
          ga -= 2.0 * config_.negative_weight * neg * z;
          gb -= 2.0 * config_.negative_weight * neg;
        }
      }
      f *= norm;
      ga *= norm;
      gb *= norm;
      if (!std::isfinite(f) || !std::isfinite(ga) || !std::isfinite(gb)) {
        throw Divergence("align_depth: non-finite objective", static_cast<std::size_t>(global_step));
      }
      if (k > 1) {
        calm = std::abs(prev - f) <= config_.convergence_tol * std::abs(prev) ? calm + 1 : 0;
        if (calm >= config_.convergence_patience) {
          break;
        }
      }
      prev = f;

      const double g[2] = {ga, gb};
      const double bc1 = 1.0 - std::pow(config_.beta1, k);
      const double bc2 = 1.0 - std::pow(config_.beta2, k);
      const double lr = config_.learning_rate * std::pow(config_.lr_decay, global_step);
      double step[2];
      for (int j = 0; j < 2; ++j) {
        m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
        v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
        step[j] = t_std_ * lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + config_.epsilon);
      }
      a -= step[0];
      b -= step[1];
      ++global_step;
    }

    AffineFit fit;
    fit.scale = a / x_std_;
    fit.shift = b - fit.scale * x_mean_;
    return fit;
  }

 private:
  const Samples& samples_;
  const std::vector<double>& all_init_;
  const AlignConfig& config_;
  double weight_sum_ = 1.0;
  double x_mean_ = 0.0;
  double x_std_ = 1.0;
  double t_std_ = 1.0;
};

double weighted_mse(const Samples& s, const AffineFit& fit) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = s.target[i] - (fit.scale * s.init[i] + fit.shift);
    sum += s.weight[i] * r * r;
  }
  return sum / static_cast<double>(s.size());
}

}  // namespace

SparseDepth project_sparse_depth(const SparsePointSet& points, const Camera& camera) {
  camera.validate();
  points.validate();
  SparseDepth out{Raster(camera.width, camera.height, 1, 0.0, false),
                  Raster(camera.width, camera.height, 1, 0.0, false)};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointProjection proj = project_point(camera, points.points[i]);
    if (proj.behind_camera() || !(proj.depth > 0.0)) {
      continue;
    }
    const double u = std::floor(proj.pixel->x() + 0.5);
    const double v = std::floor(proj.pixel->y() + 0.5);
    if (u < 0.0 || v < 0.0 || u >= camera.width || v >= camera.height) {
      continue;
    }
    const int x = static_cast<int>(u);
    const int y = static_cast<int>(v);
    if (out.target.valid(x, y) && out.target.at(x, y) <= proj.depth) {
      continue;
    }
    const double err = points.reproj_error ? (*points.reproj_error)[i] : 0.0;
    out.target.at(x, y) = proj.depth;
    out.target.set_valid(x, y, true);
    out.weights.at(x, y) = 1.0 / (1.0 + err);
    out.weights.set_valid(x, y, true);
  }
  return out;
}

double alignment_loss(const Raster& initial, const Raster& target, const Raster& weights,
                      double scale, double shift) {
  initial.require_same_size(target, "alignment_loss");
  initial.require_same_size(weights, "alignment_loss");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < initial.pixel_count(); ++p) {
    if (initial.valid(p) && target.valid(p) && weights.valid(p)) {
      const double r = target.data()[p] - (scale * initial.data()[p] + shift);
      sum += weights.data()[p] * r * r;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

AlignmentResult align_depth(const Raster& initial, const Raster& target, const Raster& weights,
                            const AlignConfig& config) {
  initial.require_same_shape(target, "align_depth");
  initial.require_same_shape(weights, "align_depth");
  if (initial.channels() != 1) {
    throw DimensionMismatch("align_depth: depth rasters must have one channel");
  }

  Samples samples;
  std::vector<double> all_init;
  for (std::size_t p = 0; p < initial.pixel_count(); ++p) {
    if (!initial.valid(p)) {
      continue;
    }
    all_init.push_back(initial.data()[p]);
    if (target.valid(p) && weights.valid(p)) {
      samples.init.push_back(initial.data()[p]);
      samples.target.push_back(target.data()[p]);
      samples.weight.push_back(weights.data()[p]);
    }
  }
  if (samples.size() < 2) {
    throw InsufficientConstraints("align_depth: need at least 2 valid sparse pixels, got " +
                                  std::to_string(samples.size()));
  }

  int global_step = 0;
  AffineFit fit;
  {
    AffineSolver solver(samples, all_init, config);
    fit = solver.run(fit, global_step);
  }

  // One-shot outlier pruning by weighted residual, keeping at least two samples.
  const auto prune = static_cast<std::size_t>(
      std::ceil(config.prune_ratio * static_cast<double>(samples.size())));
  std::size_t pruned = 0;
  if (prune > 0 && samples.size() - prune >= 2) {
    std::vector<double> residual(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double r = samples.target[i] - (fit.scale * samples.init[i] + fit.shift);
      residual[i] = samples.weight[i] * r * r;
    }
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return residual[l] > residual[r]; });
    std::vector<bool> drop(samples.size(), false);
    for (std::size_t i = 0; i < prune; ++i) {
      drop[order[i]] = true;
    }
    Samples kept;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!drop[i]) {
        kept.init.push_back(samples.init[i]);
        kept.target.push_back(samples.target[i]);
        kept.weight.push_back(samples.weight[i]);
      }
    }
    samples = std::move(kept);
    pruned = prune;

    AffineSolver solver(samples, all_init, config);
    fit = solver.run(fit, global_step);
  }

  AlignmentResult result;
  result.scale = fit.scale;
  result.shift = fit.shift;
  result.valid_count = samples.size();
  result.pruned_count = pruned;
  result.steps = global_step;
  result.alignment_loss = weighted_mse(samples, fit);
  if (!std::isfinite(result.alignment_loss)) {
    throw Divergence("align_depth: non-finite alignment loss",
                     static_cast<std::size_t>(global_step));
  }
  result.aligned_depth = Raster(initial.width(), initial.height(), 1, 0.0, false);
  for (std::size_t p = 0; p < initial.pixel_count(); ++p) {
    if (initial.valid(p)) {
      result.aligned_depth.data()[p] = fit.scale * initial.data()[p] + fit.shift;
      result.aligned_depth.mask()[p] = 1;
    }
  }
  return result;
}

}  // namespace confsplat
