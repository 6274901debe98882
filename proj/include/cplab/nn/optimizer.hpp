#pragma once

#include "cplab/nn/parameters.hpp"

#include <cstdint>

namespace cplab::nn {

enum class OptimizerMode { sgd, adam };

struct OptimizerSettings {
    OptimizerMode mode = OptimizerMode::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

/// Optimizer settings plus the Adam moment accumulators for one parameter set.
class OptimizerState {
public:
    OptimizerState(OptimizerSettings settings, const ParameterSet& like);

    [[nodiscard]] const OptimizerSettings& settings() const noexcept { return settings_; }
    [[nodiscard]] std::uint64_t step_count() const noexcept { return step_; }
    [[nodiscard]] const Eigen::VectorXd& first_moment() const noexcept { return m_; }
    [[nodiscard]] const Eigen::VectorXd& second_moment() const noexcept { return v_; }

    /// Forget the moments and step counter (used at task boundaries).
    void reset();

    friend void apply_update(ParameterSet& params, const GradientSet& grad, OptimizerState& opt);

private:
    OptimizerSettings settings_;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
    std::uint64_t step_ = 0;
};

/// sgd: theta -= lr * g. adam: bias-corrected moments,
/// theta -= lr * m_hat / (sqrt(v_hat) + eps). Throws on non-finite gradients.
void apply_update(ParameterSet& params, const GradientSet& grad, OptimizerState& opt);

}  // namespace cplab::nn
