#include "confsplat/config.hpp"

#include <yaml-cpp/yaml.h>

#include <functional>
#include <map>
#include <vector>

#include "confsplat/errors.hpp"
#include "confsplat/io.hpp"

namespace confsplat {
namespace {

struct Field {
  std::string key;
  std::function<void(const YAML::Node&)> read;
  std::function<void(YAML::Emitter&)> write;
};

template <typename T>
Field field(std::string key, T& ref) {
  return {key,
          [&ref, key](const YAML::Node& n) {
            try {
              ref = n.as<T>();
            } catch (const YAML::Exception&) {
              throw ConfigError("config: bad value for '" + key + "'");
            }
          },
          [&ref](YAML::Emitter& e) {
            if constexpr (std::is_same_v<T, double>) {
              e << format_double(ref);
            } else {
              e << ref;
            }
          }};
}

Field mode_field(std::string key, DepthMode& ref) {
  return {key,
          [&ref](const YAML::Node& n) {
            try {
              ref = depth_mode_from_string(n.as<std::string>());
            } catch (const Error& e) {
              throw ConfigError(std::string("config: ") + e.what());
            } catch (const YAML::Exception&) {
              throw ConfigError("config: bad value for 'mode'");
            }
          },
          [&ref](YAML::Emitter& e) { e << to_string(ref); }};
}

using Section = std::vector<Field>;

std::vector<std::pair<std::string, Section>> sections(ExperimentConfig& c) {
  SyntheticConfig& s = c.synthetic;
  AlignConfig& a = c.align;
  ConfidenceConfig& f = c.confidence;
  LossConfig& l = c.train.loss;
  TrainConfig& t = c.train;
  EvalConfig& e = c.eval;
  return {
      {"", {field("seed", c.seed), field("threads", c.threads), field("scene_dir", c.scene_dir),
            field("output_dir", c.output_dir), field("checkpoint_interval", c.checkpoint_interval)}},
      {"synthetic",
       {field("n_gaussians", s.n_gaussians), field("n_views", s.n_views),
        field("image_size", s.image_size), field("seed", s.seed),
        field("ring_radius", s.ring_radius), field("focal_factor", s.focal_factor),
        field("init_noise", s.init_noise), field("depth_blur", s.depth_blur),
        field("depth_noise", s.depth_noise),
        field("texture_copy", s.texture_copy), field("corrupt_views", s.corrupt_views),
        field("corrupt_strength", s.corrupt_strength), field("sparse_stride", s.sparse_stride)}},
      {"align",
       {field("learning_rate", a.learning_rate), field("lr_decay", a.lr_decay),
        field("negative_weight", a.negative_weight), field("convergence_tol", a.convergence_tol),
        field("convergence_patience", a.convergence_patience), field("max_steps", a.max_steps),
        field("prune_ratio", a.prune_ratio), field("beta1", a.beta1), field("beta2", a.beta2),
        field("epsilon", a.epsilon)}},
      {"confidence",
       {field("w_edge", f.w_edge), field("w_texture", f.w_texture),
        field("w_gradient", f.w_gradient), field("epsilon", f.epsilon),
        field("canny_low", f.canny_low), field("canny_high", f.canny_high),
        field("canny_sigma", f.canny_sigma)}},
      {"loss",
       {field("lambda_max", l.lambda_max), field("k", l.k), field("lambda_dssim", l.lambda_dssim),
        field("ssim_window", l.ssim_window), field("ssim_sigma", l.ssim_sigma),
        field("ssim_c1", l.ssim_c1), field("ssim_c2", l.ssim_c2)}},
      {"train",
       {field("iterations", t.iterations), field("lr_center_init", t.lr_center_init),
        field("lr_center_final", t.lr_center_final), field("lr_color", t.lr_color),
        field("lr_opacity", t.lr_opacity), field("lr_scale", t.lr_scale),
        field("lr_rotation", t.lr_rotation), field("spatial_lr_scale", t.spatial_lr_scale),
        field("adam_beta1", t.adam.beta1), field("adam_beta2", t.adam.beta2),
        field("adam_eps", t.adam.epsilon), field("prune_opacity_below", t.prune_opacity_below),
        field("prune_interval", t.prune_interval), mode_field("mode", t.mode)}},
      {"eval",
       {field("fscore_threshold", e.fscore_threshold),
        field("point_min_opacity", e.point_min_opacity),
        field("m3c2_normal_scale", e.m3c2_normal_scale),
        field("m3c2_cylinder_radius", e.m3c2_cylinder_radius),
        field("m3c2_max_depth", e.m3c2_max_depth), field("m3c2_core_stride", e.m3c2_core_stride)}},
  };
}

void read_section(const YAML::Node& node, Section& fields, const std::string& name) {
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    bool found = false;
    for (Field& f : fields) {
      if (f.key == key) {
        f.read(kv.second);
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError("config: unknown key '" + (name.empty() ? key : name + "." + key) + "'");
    }
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (threads < 0) throw ConfigError("config: threads must be >= 0");
  if (checkpoint_interval < 0) throw ConfigError("config: checkpoint_interval must be >= 0");
  if (eval.m3c2_core_stride < 1) throw ConfigError("config: eval.m3c2_core_stride must be >= 1");
  try {
    synthetic.validate();
    confidence.validate();
    train.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML parse error: ") + e.what());
  }
  if (root.IsNull()) {
    config.train.seed = config.seed;
    return config;
  }
  if (!root.IsMap()) {
    throw ConfigError("config: top level must be a mapping");
  }
  auto secs = sections(config);
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    bool handled = false;
    for (auto& [name, fields] : secs) {
      if (!name.empty() && name == key) {
        if (!kv.second.IsMap() && !kv.second.IsNull()) {
          throw ConfigError("config: section '" + key + "' must be a mapping");
        }
        read_section(kv.second, fields, name);
        handled = true;
      }
    }
    if (!handled) {
      YAML::Node single;
      single[key] = kv.second;
      read_section(single, secs.front().second, "");
    }
  }
  config.train.seed = config.seed;
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path));
}

std::string serialize_config(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  auto secs = sections(copy);
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (auto& [name, fields] : secs) {
    if (!name.empty()) out << YAML::Key << name << YAML::Value << YAML::BeginMap;
    for (Field& f : fields) {
      out << YAML::Key << f.key << YAML::Value;
      f.write(out);
    }
    if (!name.empty()) out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace confsplat
