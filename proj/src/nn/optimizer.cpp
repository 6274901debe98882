#include "cplab/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace cplab::nn {

void OptimizerSettings::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("optimizer: learning rate must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("optimizer: adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("optimizer: adam epsilon must be positive");
    }
}

OptimizerState::OptimizerState(OptimizerSettings settings, const ParameterSet& like)
    : settings_(settings),
      m_(Eigen::VectorXd::Zero(like.size())),
      v_(Eigen::VectorXd::Zero(like.size())) {
    settings_.validate();
}

void OptimizerState::reset() {
    m_.setZero();
    v_.setZero();
    step_ = 0;
}

void apply_update(ParameterSet& params, const GradientSet& grad, OptimizerState& opt) {
    require_congruent(params, grad, "apply_update");
    if (opt.m_.size() != params.size()) {
        throw std::invalid_argument("apply_update: optimizer state shape mismatch");
    }
    if (!grad.all_finite()) {
        throw std::domain_error("apply_update: gradient has non-finite entries");
    }
    const auto& s = opt.settings_;
    ++opt.step_;
    if (s.mode == OptimizerMode::sgd) {
        params.values() -= s.learning_rate * grad.values();
        return;
    }
    const auto& g = grad.values();
    opt.m_ = s.beta1 * opt.m_ + (1.0 - s.beta1) * g;
    opt.v_ = s.beta2 * opt.v_ + (1.0 - s.beta2) * g.cwiseAbs2();
    const auto t = static_cast<double>(opt.step_);
    const double c1 = 1.0 - std::pow(s.beta1, t);
    const double c2 = 1.0 - std::pow(s.beta2, t);
    params.values().array() -=
        s.learning_rate * (opt.m_.array() / c1) / ((opt.v_.array() / c2).sqrt() + s.epsilon);
}

}  // namespace cplab::nn
