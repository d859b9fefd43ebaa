#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace confsplat {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-15;
};

/// First and second moments for a flat parameter vector.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;

  void resize(Eigen::Index n);
  /// Keeps the entries whose `keep` flag is set, in order.
  void select(const std::vector<bool>& keep, Eigen::Index block);
};

/// One bias-corrected Adam update with a per-entry learning rate.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               const Eigen::VectorXd& learning_rate, AdamState& state, const AdamConfig& config);

}  // namespace confsplat
