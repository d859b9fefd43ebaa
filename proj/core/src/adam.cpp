#include "confsplat/adam.hpp"

#include <cmath>
#include <vector>

#include "confsplat/errors.hpp"

namespace confsplat {

void AdamState::resize(Eigen::Index n) {
  m = Eigen::VectorXd::Zero(n);
  v = Eigen::VectorXd::Zero(n);
  step = 0;
}

void AdamState::select(const std::vector<bool>& keep, Eigen::Index block) {
  Eigen::Index out = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    const Eigen::Index src = static_cast<Eigen::Index>(i) * block;
    m.segment(out, block) = m.segment(src, block);
    v.segment(out, block) = v.segment(src, block);
    out += block;
  }
  m.conservativeResize(out);
  v.conservativeResize(out);
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               const Eigen::VectorXd& learning_rate, AdamState& state, const AdamConfig& config) {
  if (grad.size() != params.size() || learning_rate.size() != params.size() ||
      state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionMismatch("adam_step: parameter, gradient, rate and moment sizes differ");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= learning_rate[i] * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

}  // namespace confsplat
