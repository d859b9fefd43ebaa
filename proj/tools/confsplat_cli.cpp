#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "confsplat/config.hpp"
#include "confsplat/errors.hpp"
#include "confsplat/io.hpp"
#include "confsplat/m3c2.hpp"
#include "confsplat/metrics.hpp"
#include "confsplat/parallel.hpp"
#include "confsplat/pipeline.hpp"
#include "confsplat/ply.hpp"
#include "confsplat/render.hpp"
#include "confsplat/ssim.hpp"
#include "confsplat/synthetic.hpp"
#include "confsplat/trainer.hpp"

namespace fs = std::filesystem;
using namespace confsplat;

namespace {

struct Options {
  std::string config;
  std::string scene;
  std::string out;
  std::string checkpoint;
  std::string camera;
  std::string pred;
  std::string gt;
  std::string rec;
  std::string history;
  double threshold = 0.0;
  int points = 500;
  int window = 100;
  int seed = -1;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? parse_config("") : load_config(o.config);
  if (o.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(o.seed);
    cfg.train.seed = cfg.seed;
    cfg.synthetic.seed = cfg.seed;
  }
  if (!o.scene.empty()) cfg.scene_dir = o.scene;
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  set_thread_count(cfg.threads);
  return cfg;
}

fs::path require_scene(const ExperimentConfig& cfg) {
  if (cfg.scene_dir.empty()) throw InvalidParameter("no scene directory (use --scene)");
  return cfg.scene_dir;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

int cmd_synth(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const fs::path dir = cfg.scene_dir.empty() ? fs::path(cfg.output_dir) : fs::path(cfg.scene_dir);
  write_synthetic_scene(dir, generate_synthetic_scene(cfg.synthetic));
  std::printf("wrote %d views to %s\n", cfg.synthetic.n_views, dir.string().c_str());
  return 0;
}

int cmd_align(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const auto results = run_align_stage(require_scene(cfg), cfg.align);
  for (std::size_t v = 0; v < results.size(); ++v) {
    std::printf("view %zu scale=%.6g shift=%.6g loss=%.6g\n", v, results[v].scale,
                results[v].shift, results[v].alignment_loss);
  }
  return 0;
}

int cmd_confidence(const Options& o) {
  const ExperimentConfig cfg = load(o);
  run_confidence_stage(require_scene(cfg), cfg.confidence);
  std::printf("wrote confidence maps for %d views\n", count_views(cfg.scene_dir));
  return 0;
}

int cmd_train(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const fs::path scene = require_scene(cfg);
  const fs::path out = cfg.output_dir;
  const std::vector<TrainView> views = load_train_views(scene);
  const std::vector<Gaussian> init = init_from_sparse(read_point_set(scene / "sparse.ply"));
  fs::create_directories(out);
  write_text(out / "config.yaml", serialize_config(cfg));

  const auto checkpoint_name = [](int it) {
    char name[40];
    std::snprintf(name, sizeof(name), "checkpoint_%06d.ply", it);
    return std::string(name);
  };
  const TrainState state = train(init, views, cfg.train, [&](const TrainState& s) {
    if (cfg.checkpoint_interval > 0 && s.iteration % cfg.checkpoint_interval == 0) {
      write_gaussians(out / checkpoint_name(s.iteration), s.gaussians());
    }
  });
  write_gaussians(out / "final.ply", state.gaussians());

  CsvTable history{{"iteration", "image_loss", "depth_loss", "lambda_d", "total_loss", "psnr_train"},
                   {}};
  for (const HistoryRecord& r : state.history) {
    history.rows.push_back({static_cast<double>(r.iteration), r.image_loss, r.depth_loss,
                            r.lambda_d, r.total_loss, r.psnr_train});
  }
  write_csv(out / "history.csv", history);
  std::printf("trained %d iterations, %zu gaussians, final total loss %.6g\n", state.iteration,
              state.gaussian_count(), state.history.back().total_loss);
  return 0;
}

int cmd_render(const Options& o) {
  if (o.out.empty()) throw InvalidParameter("--out is required");
  const ExperimentConfig cfg = load(o);
  const RenderOutput r = render(read_gaussians(o.checkpoint), read_camera(o.camera));
  const fs::path base = cfg.output_dir;
  write_png(base.string() + ".png", r.color);
  write_raw_depth(base.string() + ".cdg", r.depth);
  return 0;
}

std::vector<fs::path> png_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") {
      out.push_back(fs::relative(e.path(), dir));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_eval2d(const Options& o) {
  const ExperimentConfig cfg = load(o);
  std::vector<fs::path> names;
  if (fs::is_directory(o.pred)) {
    names = png_files(o.pred);
  } else {
    names.push_back("");
  }
  nlohmann::json per = nlohmann::json::array();
  double psnr_sum = 0.0, ssim_sum = 0.0;
  std::size_t matched = 0;
  for (const fs::path& name : names) {
    const fs::path p = name.empty() ? fs::path(o.pred) : o.pred / name;
    const fs::path g = name.empty() ? fs::path(o.gt) : o.gt / name;
    if (!fs::exists(g)) continue;
    const Raster a = read_png(p), b = read_png(g);
    const double ps = psnr(a, b);
    const double ss = ssim(a, b, cfg.train.loss.ssim_params());
    per.push_back({{"image", name.empty() ? p.filename().string() : name.generic_string()},
                   {"psnr", number(ps)},
                   {"ssim", ss}});
    psnr_sum += ps;
    ssim_sum += ss;
    ++matched;
  }
  if (matched == 0) throw IoError("no matching PNG files between --pred and --gt");
  const nlohmann::json report = {{"count", matched},
                                 {"psnr", number(psnr_sum / matched)},
                                 {"ssim", ssim_sum / matched},
                                 {"images", per}};
  if (o.out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    write_json(o.out, report);
  }
  return 0;
}

// Gaussian checkpoints contribute their opaque centers; plain clouds are used as-is.
PointCloud load_cloud(const fs::path& path, double min_opacity) {
  const PlyFile ply = read_ply(path);
  const PlyElement* v = ply.find("vertex");
  if (v && v->find("opacity") >= 0 && v->find("rot_0") >= 0) {
    return extract_points(read_gaussians(path), min_opacity);
  }
  return read_point_cloud(path);
}

int cmd_eval3d(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const PointCloud rec = load_cloud(o.rec, cfg.eval.point_min_opacity);
  const PointCloud gt = load_cloud(o.gt, cfg.eval.point_min_opacity);
  double tau = o.threshold > 0.0 ? o.threshold : cfg.eval.fscore_threshold;
  if (!(tau > 0.0)) tau = default_fscore_threshold(gt);
  const GeometricReport f = fscore(rec, gt, tau);

  M3C2Params params = default_m3c2_params(gt);
  if (cfg.eval.m3c2_normal_scale > 0.0) params.normal_scale = cfg.eval.m3c2_normal_scale;
  if (cfg.eval.m3c2_cylinder_radius > 0.0) params.cylinder_radius = cfg.eval.m3c2_cylinder_radius;
  if (cfg.eval.m3c2_max_depth > 0.0) params.max_depth = cfg.eval.m3c2_max_depth;
  params.core_stride = cfg.eval.m3c2_core_stride;
  const M3C2Result m = m3c2(gt, rec, params);

  const fs::path out = cfg.output_dir;
  const nlohmann::json report = {
      {"threshold", f.threshold},
      {"precision", f.precision},
      {"recall", f.recall},
      {"fscore_percent", f.fscore_percent},
      {"reconstructed_points", rec.size()},
      {"truth_points", gt.size()},
      {"m3c2",
       {{"normal_scale", params.normal_scale},
        {"cylinder_radius", params.cylinder_radius},
        {"max_depth", params.max_depth},
        {"core_points", m.core_points.size()},
        {"valid_count", m.valid_count},
        {"rmse", number(m.rmse)}}}};
  write_json(out / "report.json", report);
  PointCloud core;
  core.points = m.core_points;
  core.normals = m.normals;
  write_point_cloud(out / "m3c2.ply", core, "m3c2_dist", m.distances);
  std::printf("F=%.4g%% (tau=%.6g) M3C2 RMSE=%.6g\n", f.fscore_percent, tau, m.rmse);
  return 0;
}

// Trailing moving average and variance of one column, sampled at `points` rows.
int cmd_curves(const Options& o) {
  if (o.points < 2 || o.window < 1) throw InvalidParameter("--points must be >= 2 and --window >= 1");
  const CsvTable in = read_csv(o.history);
  const auto column = [&](const std::string& name) {
    const auto it = std::find(in.header.begin(), in.header.end(), name);
    if (it == in.header.end()) throw IoError("history has no column " + name);
    return static_cast<std::size_t>(it - in.header.begin());
  };
  const std::size_t c_it = column("iteration");
  const std::vector<std::string> keys = {"image_loss", "depth_loss", "total_loss", "psnr_train"};
  std::vector<std::size_t> cols;
  for (const auto& k : keys) cols.push_back(column(k));
  const std::size_t n = in.rows.size();
  if (n == 0) throw IoError("history is empty");

  CsvTable out;
  out.header = {"iteration"};
  for (const auto& k : keys) out.header.push_back(k);
  out.header.push_back("total_loss_mean");
  out.header.push_back("total_loss_var");
  const std::size_t c_total = column("total_loss");
  const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(o.points));
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = count == 1 ? n - 1 : k * (n - 1) / (count - 1);
    std::vector<double> row = {in.rows[i][c_it]};
    for (std::size_t c : cols) row.push_back(in.rows[i][c]);
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(o.window) ? i + 1 - o.window : 0;
    double mean = 0.0, var = 0.0;
    for (std::size_t j = lo; j <= i; ++j) mean += in.rows[j][c_total];
    mean /= static_cast<double>(i - lo + 1);
    for (std::size_t j = lo; j <= i; ++j) var += std::pow(in.rows[j][c_total] - mean, 2);
    var /= static_cast<double>(i - lo + 1);
    row.push_back(mean);
    row.push_back(var);
    out.rows.push_back(std::move(row));
  }
  if (o.out.empty()) {
    std::cout << format_csv(out);
  } else {
    write_csv(o.out, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confsplat: confidence-aware depth-regularized Gaussian splatting toolkit"};
  app.require_subcommand(1);
  Options o;
  int (*handler)(const Options&) = nullptr;
  std::string stage;

  const auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "YAML experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "overrides the config seed");
    sub->callback([&, name, fn] {
      handler = fn;
      stage = name;
    });
    return sub;
  };

  CLI::App* synth = add("synth", "generate a synthetic scene", cmd_synth);
  synth->add_option("--out", o.out, "scene directory")->required();

  CLI::App* align = add("align", "align monocular depth to sparse points", cmd_align);
  align->add_option("--scene", o.scene, "scene directory")->required();

  CLI::App* conf = add("confidence", "compute per-view confidence maps", cmd_confidence);
  conf->add_option("--scene", o.scene, "scene directory")->required();

  CLI::App* tr = add("train", "optimize Gaussians", cmd_train);
  tr->add_option("--scene", o.scene, "scene directory");
  tr->add_option("--out", o.out, "output directory");

  CLI::App* rd = add("render", "render a checkpoint", cmd_render);
  rd->add_option("--checkpoint", o.checkpoint, "Gaussian PLY")->required()->check(CLI::ExistingFile);
  rd->add_option("--camera", o.camera, "camera JSON")->required()->check(CLI::ExistingFile);
  rd->add_option("--out", o.out, "output prefix; writes PREFIX.png and PREFIX.cdg")->required();

  CLI::App* e2 = add("eval2d", "PSNR and SSIM between PNG files or directories", cmd_eval2d);
  e2->add_option("--pred", o.pred, "predicted PNG or directory")->required()->check(CLI::ExistingPath);
  e2->add_option("--gt", o.gt, "ground-truth PNG or directory")->required()->check(CLI::ExistingPath);
  e2->add_option("--out", o.out, "report JSON (stdout if omitted)");

  CLI::App* e3 = add("eval3d", "F-score and M3C2 between point sets", cmd_eval3d);
  e3->add_option("--rec", o.rec, "reconstructed PLY")->required()->check(CLI::ExistingFile);
  e3->add_option("--gt", o.gt, "ground-truth PLY")->required()->check(CLI::ExistingFile);
  e3->add_option("--threshold", o.threshold, "F-score distance threshold");
  e3->add_option("--out", o.out, "output directory for report.json and m3c2.ply");

  CLI::App* cv = add("curves", "downsample a training history for plotting", cmd_curves);
  cv->add_option("--history", o.history, "history CSV")->required()->check(CLI::ExistingFile);
  cv->add_option("--points", o.points, "number of output rows");
  cv->add_option("--window", o.window, "moving window in iterations");
  cv->add_option("--out", o.out, "output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::fprintf(stderr, "ERROR:cli: %s\n", msg.c_str());
    return 2;
  }

  try {
    return handler(o);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::fprintf(stderr, "ERROR:%s: %s\n", stage.c_str(), msg.c_str());
    return 1;
  }
}
