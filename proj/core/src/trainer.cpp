#include "confsplat/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "confsplat/errors.hpp"
#include "confsplat/kdtree.hpp"
#include "confsplat/metrics.hpp"
#include "confsplat/render.hpp"

namespace confsplat {
namespace {

constexpr double kFallbackScale = 0.01;
constexpr double kInitialOpacity = 0.1;

// Per-entry learning rates for the packed layout at `iteration`.
Eigen::VectorXd learning_rates(const TrainConfig& cfg, double spatial_scale, int iteration,
                               std::size_t count) {
  const double t = cfg.iterations > 1
                       ? std::clamp(static_cast<double>(iteration) / cfg.iterations, 0.0, 1.0)
                       : 1.0;
  const double center = spatial_scale * std::exp((1.0 - t) * std::log(cfg.lr_center_init) +
                                                 t * std::log(cfg.lr_center_final));
  Eigen::Matrix<double, param::kCount, 1> block;
  block.segment<3>(param::kCenter).setConstant(center);
  block.segment<3>(param::kLogScale).setConstant(cfg.lr_scale);
  block.segment<4>(param::kRotation).setConstant(cfg.lr_rotation);
  block[param::kOpacity] = cfg.lr_opacity;
  block.segment<3>(param::kColor).setConstant(cfg.lr_color);
  return block.replicate(static_cast<Eigen::Index>(count), 1);
}

// Unit quaternions and colors in [0, 1] after every step.
void project_constraints(Eigen::VectorXd& params) {
  const Eigen::Index n = params.size() / static_cast<Eigen::Index>(param::kCount);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index base = i * param::kCount;
    auto q = params.segment<4>(base + param::kRotation);
    const double norm = q.norm();
    if (norm > 0.0) q /= norm;
    auto c = params.segment<3>(base + param::kColor);
    c = c.cwiseMax(0.0).cwiseMin(1.0);
  }
}

void prune(TrainState& state, double threshold) {
  const std::size_t n = state.gaussian_count();
  std::vector<bool> keep(n);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double logit = state.params[static_cast<Eigen::Index>(i * param::kCount + param::kOpacity)];
    keep[i] = sigmoid(logit) >= threshold;
    kept += keep[i];
  }
  if (kept == n) return;
  if (kept == 0) {
    throw TrainingAborted("train: pruning removed every Gaussian",
                          static_cast<std::size_t>(state.iteration));
  }
  Eigen::VectorXd next(static_cast<Eigen::Index>(kept * param::kCount));
  Eigen::Index out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    next.segment<param::kCount>(out) =
        state.params.segment<param::kCount>(static_cast<Eigen::Index>(i * param::kCount));
    out += param::kCount;
  }
  state.params = std::move(next);
  state.adam.select(keep, param::kCount);
}

void check_views(const std::vector<TrainView>& views) {
  if (views.empty()) {
    throw InvalidParameter("train: need at least one view");
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const TrainView& v = views[i];
    v.camera.validate();
    if (v.image.channels() != 3 || v.image.width() != v.camera.width ||
        v.image.height() != v.camera.height) {
      throw DimensionMismatch("train: view " + std::to_string(i) +
                              " image must be 3-channel and match the camera size");
    }
    v.image.require_same_size(v.depth, "train view depth");
    v.image.require_same_size(v.confidence, "train view confidence");
    if (!(v.alignment_loss >= 0.0)) {
      throw InvalidParameter("train: view " + std::to_string(i) + " alignment loss must be >= 0");
    }
  }
}

}  // namespace

std::string to_string(DepthMode mode) {
  switch (mode) {
    case DepthMode::kFull: return "full";
    case DepthMode::kImageOnly: return "image-only";
    case DepthMode::kNoConfidence: return "no-confidence";
    case DepthMode::kFixedWeight: return "fixed-weight";
  }
  return "full";
}

DepthMode depth_mode_from_string(const std::string& name) {
  for (DepthMode m : {DepthMode::kFull, DepthMode::kImageOnly, DepthMode::kNoConfidence,
                      DepthMode::kFixedWeight}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidParameter("unknown depth mode '" + name +
                         "' (expected full, image-only, no-confidence or fixed-weight)");
}

void TrainConfig::validate() const {
  if (iterations <= 0) {
    throw InvalidParameter("train: iterations must be positive");
  }
  for (double lr : {lr_center_init, lr_center_final, lr_color, lr_opacity, lr_scale, lr_rotation}) {
    if (!(lr > 0.0) || !std::isfinite(lr)) {
      throw InvalidParameter("train: learning rates must be positive");
    }
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 &&
        adam.epsilon > 0.0)) {
    throw InvalidParameter("train: Adam betas must lie in [0, 1) and epsilon be positive");
  }
  if (prune_interval < 0 || !(prune_opacity_below >= 0.0 && prune_opacity_below < 1.0)) {
    throw InvalidParameter("train: invalid pruning schedule");
  }
  loss.validate();
}

std::vector<Gaussian> init_from_sparse(const SparsePointSet& points) {
  points.validate();
  if (points.points.empty()) {
    throw InvalidParameter("init_from_sparse: empty point set");
  }
  const std::size_t n = points.size();
  std::vector<double> scales(n, kFallbackScale);
  if (n >= 4) {
    const KdTree tree(points.points);
    for (std::size_t i = 0; i < n; ++i) {
      const auto nn = tree.knn(points.points[i], 4);  // includes the point itself
      double sum = 0.0;
      for (std::size_t k = 1; k < nn.size(); ++k) sum += nn[k].distance;
      scales[i] = std::max(sum / 3.0, 1e-7);
    }
  }
  std::vector<Gaussian> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 color = points.colors ? (*points.colors)[i] : Vec3::Constant(0.5);
    out.push_back(Gaussian::from_values(points.points[i], Vec3::Constant(scales[i]),
                                        Vec4(1.0, 0.0, 0.0, 0.0), kInitialOpacity, color));
  }
  return out;
}

double camera_extent(const std::vector<TrainView>& views) {
  Vec3 mean = Vec3::Zero();
  for (const TrainView& v : views) mean += v.camera.position();
  mean /= static_cast<double>(views.size());
  double radius = 0.0;
  for (const TrainView& v : views) radius = std::max(radius, (v.camera.position() - mean).norm());
  return std::max(1.1 * radius, 1e-6);
}

TrainState train(const std::vector<Gaussian>& initial, const std::vector<TrainView>& views,
                 const TrainConfig& config, const TrainObserver& observer) {
  config.validate();
  check_views(views);
  if (initial.empty()) {
    throw InvalidParameter("train: need at least one Gaussian");
  }
  const double spatial_scale =
      config.spatial_lr_scale > 0.0 ? config.spatial_lr_scale : camera_extent(views);

  // Confidence of one on the valid pixels, for the ablation without confidence maps.
  std::vector<Raster> unit_confidence;
  if (config.mode == DepthMode::kNoConfidence) {
    for (const TrainView& v : views) {
      Raster c(v.confidence.width(), v.confidence.height(), 1, 1.0);
      std::copy(v.confidence.mask().begin(), v.confidence.mask().end(), c.mask().begin());
      for (std::size_t p = 0; p < c.pixel_count(); ++p) {
        if (!c.valid(p)) c.invalidate(p);
      }
      unit_confidence.push_back(std::move(c));
    }
  }

  TrainState state;
  state.params = pack_gaussians(initial);
  project_constraints(state.params);
  state.adam.resize(state.params.size());

  std::mt19937_64 rng(config.seed);
  std::vector<int> order(views.size());
  std::size_t cursor = order.size();

  for (int it = 1; it <= config.iterations; ++it) {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const int vi = order[cursor++];
    const TrainView& view = views[static_cast<std::size_t>(vi)];
    const std::vector<Gaussian> gaussians = unpack_gaussians(state.params);

    const RenderOutput out = render(gaussians, view.camera);
    const ImageLoss img = image_loss(out.color, view.image, config.loss);
    const Raster& confidence =
        config.mode == DepthMode::kNoConfidence ? unit_confidence[static_cast<std::size_t>(vi)]
                                                : view.confidence;
    const DepthLoss dl = depth_loss(out.depth, view.depth, confidence);

    double lambda_d = 0.0;
    switch (config.mode) {
      case DepthMode::kImageOnly: break;
      case DepthMode::kFixedWeight: lambda_d = config.loss.lambda_max; break;
      case DepthMode::kFull:
      case DepthMode::kNoConfidence:
        lambda_d = adaptive_weight(view.alignment_loss, config.loss);
        break;
    }
    if (dl.empty()) lambda_d = 0.0;

    if (!std::isfinite(img.value)) {
      throw TrainingAborted("train: non-finite image loss", static_cast<std::size_t>(it));
    }
    if (!std::isfinite(dl.value)) {
      throw TrainingAborted("train: non-finite depth loss", static_cast<std::size_t>(it));
    }
    const double total = config.mode == DepthMode::kImageOnly
                             ? img.value
                             : total_loss(img.value, dl.value, lambda_d);

    Raster grad_depth(out.depth.width(), out.depth.height(), 1);
    if (config.mode != DepthMode::kImageOnly) {
      for (std::size_t p = 0; p < grad_depth.pixel_count(); ++p) {
        grad_depth.data()[p] = lambda_d * dl.grad.data()[p];
      }
    }
    const Eigen::VectorXd grad = render_backward(gaussians, view.camera, img.grad, grad_depth);
    if (!grad.allFinite()) {
      throw TrainingAborted("train: non-finite gradient", static_cast<std::size_t>(it));
    }
    adam_step(state.params,
              grad,
              learning_rates(config, spatial_scale, it - 1, gaussians.size()),
              state.adam, config.adam);
    project_constraints(state.params);
    state.iteration = it;

    HistoryRecord rec;
    rec.iteration = it;
    rec.image_loss = img.value;
    rec.depth_loss = dl.value;
    rec.lambda_d = lambda_d;
    rec.total_loss = total;
    rec.psnr_train = psnr(out.color, view.image);
    rec.view = vi;
    state.history.push_back(rec);

    if (config.prune_interval > 0 && it % config.prune_interval == 0) {
      prune(state, config.prune_opacity_below);
    }
    if (observer) observer(state);
  }
  return state;
}

}  // namespace confsplat
