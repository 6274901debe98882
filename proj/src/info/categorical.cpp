#include "cplab/info/categorical.hpp"

#include <cmath>
#include <string>

namespace cplab::info {

void validate_probabilities(const Eigen::Ref<const Eigen::VectorXd>& probs) {
    if (probs.size() < 2) {
        throw InvalidDistribution("categorical needs at least two outcomes");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const double p = probs(i);
        if (!std::isfinite(p) || p < 0.0) {
            throw InvalidDistribution("probability entry " + std::to_string(i) +
                                      " is negative or not finite");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
    }
}

Categorical::Categorical(Eigen::VectorXd probs) : probs_(std::move(probs)) {
    validate_probabilities(probs_);
}

Categorical Categorical::uniform(std::size_t m) {
    if (m < 2) {
        throw InvalidDistribution("categorical needs at least two outcomes");
    }
    return Categorical(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m),
                                                 1.0 / static_cast<double>(m)));
}

Categorical Categorical::normalized(const Eigen::VectorXd& weights) {
    if ((weights.array() < 0.0).any() || !weights.allFinite()) {
        throw InvalidDistribution("weights must be finite and nonnegative");
    }
    const double total = weights.sum();
    if (!(total > 0.0)) {
        throw InvalidDistribution("weights have no mass");
    }
    Eigen::VectorXd p = weights / total;
    // One correction pass keeps the sum inside the 1e-12 contract for long vectors.
    p /= p.sum();
    return Categorical(std::move(p));
}

Categorical Categorical::smoothed_one_hot(std::size_t m, std::size_t label, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("smoothing alpha must lie in [0, 1]");
    }
    if (label >= m) {
        throw std::invalid_argument("label out of range for smoothed target");
    }
    Eigen::VectorXd p = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m),
                                                  alpha / static_cast<double>(m));
    p(static_cast<Eigen::Index>(label)) += 1.0 - alpha;
    return Categorical(std::move(p));
}

Eigen::VectorXd Categorical::log_probs() const {
    return probs_.unaryExpr([](double p) { return floored_log(p); });
}

double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& q,
                     const Eigen::Ref<const Eigen::VectorXd>& p) {
    if (q.size() != p.size()) {
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (q(i) > 0.0) {
            acc += q(i) * (floored_log(q(i)) - floored_log(p(i)));
        }
    }
    // The floor can push the sum a hair below zero for q ~= p.
    return acc > 0.0 ? acc : 0.0;
}

double kl_divergence(const Categorical& q, const Categorical& p) {
    return kl_divergence(q.probs(), p.probs());
}

double entropy(const Eigen::Ref<const Eigen::VectorXd>& p) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) {
            acc -= p(i) * floored_log(p(i));
        }
    }
    return acc;
}

double entropy(const Categorical& p) {
    return entropy(p.probs());
}

}  // namespace cplab::info
