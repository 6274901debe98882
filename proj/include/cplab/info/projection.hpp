#pragma once

#include "cplab/info/categorical.hpp"

#include <Eigen/Core>

#include <cstddef>

namespace cplab::info {

/// { Q : KL(Q || center) <= radius } with a uniform center.
class KlBall {
public:
    /// Throws if radius < 0 or radius > log M.
    KlBall(std::size_t m, double radius);

    [[nodiscard]] const Categorical& center() const noexcept { return center_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return center_.size(); }
    [[nodiscard]] bool contains(const Categorical& q, double slack = 0.0) const;

private:
    Categorical center_;
    double radius_;
};

struct BallProjection {
    Categorical point;
    /// Lagrange multiplier b of the active constraint; 0 when P was already inside.
    double multiplier = 0.0;
};

inline constexpr double kMultiplierUpper = 1e6;
inline constexpr double kConstraintTolerance = 1e-9;
inline constexpr int kMaxBisections = 200;

/// Point on the geometric path from P to uniform: q_i proportional to p_i^(1/(1+b)),
/// computed with floored logs.
Categorical geometric_path_point(const Categorical& p, double multiplier);

/// argmin_{Q in ball} KL(Q || P). Outside the ball the minimizer is
/// geometric_path_point(P, b) with b bisected on [0, 1e6] until
/// KL(Q || uniform) = radius within 1e-9; the returned point is the feasible
/// end of the final bracket.
BallProjection project_to_kl_ball(const Categorical& p, const KlBall& ball);

/// N conditional rows Q(.|x_n) with empirical input weights w_n.
class ConditionalClassifier {
public:
    /// Each row must be a distribution (M >= 2), weights nonnegative and summing to 1.
    ConditionalClassifier(Eigen::MatrixXd rows, Eigen::VectorXd weights);
    /// Equal weights 1/N.
    explicit ConditionalClassifier(Eigen::MatrixXd rows);

    [[nodiscard]] const Eigen::MatrixXd& rows() const noexcept { return rows_; }
    [[nodiscard]] const Eigen::VectorXd& weights() const noexcept { return weights_; }
    [[nodiscard]] Eigen::Index samples() const noexcept { return rows_.rows(); }
    [[nodiscard]] Eigen::Index classes() const noexcept { return rows_.cols(); }
    [[nodiscard]] Categorical row(Eigen::Index n) const { return Categorical(rows_.row(n).transpose()); }

private:
    Eigen::MatrixXd rows_;
    Eigen::VectorXd weights_;
};

/// sum_n w_n KL(Q_n || P_n).
double expected_kl(const ConditionalClassifier& q, const ConditionalClassifier& p);
/// sum_n w_n KL(Q_n || uniform).
double expected_kl_to_uniform(const ConditionalClassifier& q);

struct ClassifierProjection {
    ConditionalClassifier classifier;
    double multiplier = 0.0;
};

/// argmin sum_n w_n KL(Q_n || P_n) s.t. sum_n w_n KL(Q_n || uniform) <= radius.
/// All rows share one multiplier, bisected on the aggregate constraint.
ClassifierProjection project_classifier(const ConditionalClassifier& cls, double radius);

/// KL(Q||P) - KL(Q||P*) - KL(P*||P) with P* the projection of P onto `ball`.
/// Nonnegative up to rounding whenever Q is in the ball. Throws if Q is outside.
double check_pythagorean(const Categorical& q, const Categorical& p, const KlBall& ball);

struct CrossEntropyPair {
    double raw = 0.0;        ///< sum_n w_n sum_y prev_n(y) (-log cur_n(y))
    double projected = 0.0;  ///< same with cur replaced by its classifier projection
};

/// Cross-entropy of the previous-task classifier against the current one, before
/// and after projecting the current classifier. Throws if `prev` violates the
/// radius constraint or the shapes differ. Weights are taken from `prev`.
CrossEntropyPair check_prop1(const ConditionalClassifier& prev, const ConditionalClassifier& cur,
                             double radius);

}  // namespace cplab::info
