#include "cplab/cl/penalty.hpp"

#include <stdexcept>

namespace cplab::cl {

PenaltyValue quadratic_penalty(const nn::ParameterSet& params, const Anchor& anchor,
                               const ImportanceMap& omega, double lambda) {
    nn::require_congruent(params, anchor.params, "quadratic_penalty");
    nn::require_congruent(params, omega, "quadratic_penalty");
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("quadratic_penalty: lambda must be nonnegative");
    }
    nn::GradientSet grad = nn::GradientSet::zeros_like(params);
    if (lambda == 0.0) {
        return {0.0, std::move(grad)};
    }
    const Eigen::ArrayXd diff = params.values().array() - anchor.params.values().array();
    const Eigen::ArrayXd weighted = omega.values().array() * diff;
    grad.values() = (2.0 * lambda) * weighted.matrix();
    return {lambda * (weighted * diff).sum(), std::move(grad)};
}

double cpr_penalty_value(const Eigen::MatrixXd& probs, const info::Categorical& g) {
    if (probs.cols() != static_cast<Eigen::Index>(g.size())) {
        throw std::invalid_argument("cpr_penalty_value: row width does not match target");
    }
    if (probs.rows() < 1) {
        throw std::invalid_argument("cpr_penalty_value: no rows");
    }
    double acc = 0.0;
    for (Eigen::Index n = 0; n < probs.rows(); ++n) {
        acc += info::kl_divergence(probs.row(n).transpose(), g.probs());
    }
    return acc / static_cast<double>(probs.rows());
}

info::Categorical smoothing_target(std::size_t m, double alpha, std::size_t label) {
    return info::Categorical::smoothed_one_hot(m, label, alpha);
}

}  // namespace cplab::cl
