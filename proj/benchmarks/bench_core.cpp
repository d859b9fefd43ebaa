#include <benchmark/benchmark.h>

#include <random>

#include "confsplat/confidence.hpp"
#include "confsplat/kdtree.hpp"
#include "confsplat/losses.hpp"
#include "confsplat/render.hpp"
#include "confsplat/synthetic.hpp"

namespace {

using namespace confsplat;

SyntheticScene scene_for(int size, int gaussians) {
  SyntheticConfig cfg;
  cfg.image_size = size;
  cfg.n_gaussians = gaussians;
  cfg.n_views = 1;
  return generate_synthetic_scene(cfg);
}

void BM_Render(benchmark::State& state) {
  const SyntheticScene s = scene_for(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(render(s.gaussians, s.views[0].camera));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Render)->Args({64, 20})->Args({128, 100})->Unit(benchmark::kMillisecond);

void BM_RenderBackward(benchmark::State& state) {
  const SyntheticScene s = scene_for(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Camera& cam = s.views[0].camera;
  Raster gc(cam.width, cam.height, 3, 0.01), gd(cam.width, cam.height, 1, 0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_backward(s.gaussians, cam, gc, gd));
  }
}
BENCHMARK(BM_RenderBackward)->Args({64, 20})->Args({128, 100})->Unit(benchmark::kMillisecond);

void BM_ImageLoss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster a(n, n, 3), b(n, n, 3);
  for (double& v : a.data()) v = u(rng);
  for (double& v : b.data()) v = u(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(image_loss(a, b, LossConfig{}));
  }
}
BENCHMARK(BM_ImageLoss)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Confidence(benchmark::State& state) {
  const SyntheticScene s = scene_for(static_cast<int>(state.range(0)), 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_confidence(s.views[0].image, s.views[0].true_depth));
  }
}
BENCHMARK(BM_Confidence)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_KdTreeNearest(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(static_cast<std::size_t>(state.range(0)));
  for (Vec3& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  const KdTree tree(pts);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.nearest(Vec3(u(rng), u(rng), u(rng))));
  }
}
BENCHMARK(BM_KdTreeNearest)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
