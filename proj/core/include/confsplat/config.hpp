#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "confsplat/confidence.hpp"
#include "confsplat/depth_align.hpp"
#include "confsplat/synthetic.hpp"
#include "confsplat/trainer.hpp"

namespace confsplat {

struct EvalConfig {
  double fscore_threshold = 0.0;    // <= 0: bounding-box diagonal / 500
  double point_min_opacity = 0.5;   // Gaussian centers above this opacity form the cloud
  double m3c2_normal_scale = 0.0;   // <= 0: defaults from the reference spacing
  double m3c2_cylinder_radius = 0.0;
  double m3c2_max_depth = 0.0;
  int m3c2_core_stride = 1;
};

/// Every stage's settings plus paths, seed and thread count.
struct ExperimentConfig {
  std::uint64_t seed = 0;  // training seed
  int threads = 0;         // 0: runtime default
  std::string scene_dir;
  std::string output_dir = "out";
  int checkpoint_interval = 0;  // 0: final checkpoint only
  SyntheticConfig synthetic;
  AlignConfig align;
  ConfidenceConfig confidence;
  TrainConfig train;  // train.loss holds the loss settings; train.seed mirrors seed
  EvalConfig eval;

  void validate() const;
};

/// Parses the YAML document. Unknown sections or keys raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// YAML with every key written explicitly.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace confsplat
