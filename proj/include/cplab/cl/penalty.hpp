#pragma once

#include "cplab/cl/importance.hpp"
#include "cplab/info/categorical.hpp"
#include "cplab/nn/parameters.hpp"

#include <Eigen/Core>

#include <cstddef>

namespace cplab::cl {

struct PenaltyValue {
    double value = 0.0;
    nn::GradientSet grad;
};

/// lambda * sum_i omega_i (theta_i - anchor_i)^2 and its gradient.
PenaltyValue quadratic_penalty(const nn::ParameterSet& params, const Anchor& anchor,
                               const ImportanceMap& omega, double lambda);

/// Mean over rows of KL(row || g): the output-regularizer term reported on its own.
double cpr_penalty_value(const Eigen::MatrixXd& probs, const info::Categorical& g);

/// Smoothed training target (1 - alpha) onehot(label) + alpha uniform over M classes.
info::Categorical smoothing_target(std::size_t m, double alpha, std::size_t label);

}  // namespace cplab::cl
