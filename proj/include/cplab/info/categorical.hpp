#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace cplab::info {

/// Floor applied to every probability before it enters a logarithm.
inline constexpr double kLogFloor = 1e-12;
inline constexpr double kSumTolerance = 1e-12;

class InvalidDistribution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A probability vector on the simplex with at least two outcomes.
class Categorical {
public:
    /// Validates: M >= 2, entries finite and >= 0, sum within kSumTolerance of 1.
    explicit Categorical(Eigen::VectorXd probs);

    static Categorical uniform(std::size_t m);
    /// Renormalizes a nonnegative vector with positive mass.
    static Categorical normalized(const Eigen::VectorXd& weights);
    /// (1 - alpha) * onehot(label) + alpha * uniform.
    static Categorical smoothed_one_hot(std::size_t m, std::size_t label, double alpha);

    [[nodiscard]] const Eigen::VectorXd& probs() const noexcept { return probs_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }
    [[nodiscard]] double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

    /// Entrywise log(max(p, kLogFloor)).
    [[nodiscard]] Eigen::VectorXd log_probs() const;

private:
    Eigen::VectorXd probs_;
};

/// Throws InvalidDistribution unless `probs` is a valid distribution row.
void validate_probabilities(const Eigen::Ref<const Eigen::VectorXd>& probs);

inline double floored_log(double p) {
    return std::log(p > kLogFloor ? p : kLogFloor);
}

/// sum_i q_i log(q_i / p_i), with 0 log 0 = 0 and the floor on p_i.
double kl_divergence(const Categorical& q, const Categorical& p);
/// Same formula on raw rows; callers guarantee the rows are distributions.
double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& q,
                     const Eigen::Ref<const Eigen::VectorXd>& p);

double entropy(const Categorical& p);
double entropy(const Eigen::Ref<const Eigen::VectorXd>& p);

/// Dirichlet(1) draw: normalized i.i.d. exponentials.
template <class Generator>
Categorical sample_simplex(std::size_t m, Generator& rng) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        double u = rng.uniform();
        while (u <= 0.0) {
            u = rng.uniform();
        }
        w(i) = -std::log(u);
    }
    return Categorical::normalized(w);
}

}  // namespace cplab::info
