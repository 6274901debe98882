#include "cplab/info/projection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cplab::info {

KlBall::KlBall(std::size_t m, double radius) : center_(Categorical::uniform(m)), radius_(radius) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("KlBall: radius must be finite and nonnegative");
    }
    if (radius > std::log(static_cast<double>(m))) {
        throw std::invalid_argument("KlBall: radius " + std::to_string(radius) +
                                    " exceeds log M, the largest divergence from uniform");
    }
}

bool KlBall::contains(const Categorical& q, double slack) const {
    return q.size() == dimension() && kl_divergence(q, center_) <= radius_ + slack;
}

namespace {

Eigen::VectorXd path_row(const Eigen::Ref<const Eigen::VectorXd>& p, double multiplier) {
    const double scale = 1.0 / (1.0 + multiplier);
    Eigen::VectorXd logq = p.unaryExpr([scale](double v) { return scale * floored_log(v); });
    logq.array() -= logq.maxCoeff();
    Eigen::VectorXd q = logq.array().exp();
    return q / q.sum();
}

double kl_to_uniform(const Eigen::Ref<const Eigen::VectorXd>& q) {
    // KL(q || u) = log M - H(q); summing q log(q M) directly keeps small values accurate.
    const double m = static_cast<double>(q.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (q(i) > 0.0) {
            acc += q(i) * std::log(q(i) * m);
        }
    }
    return acc > 0.0 ? acc : 0.0;
}

/// Bisects a non-increasing constraint(b) onto `radius`. Returns the smallest
/// bracketed b found with constraint(b) <= radius.
template <class Constraint>
double bisect_multiplier(Constraint&& constraint, double radius) {
    double lo = 0.0;
    double hi = kMultiplierUpper;
    double at_hi = constraint(hi);
    if (at_hi > radius) {
        return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < kMaxBisections && radius - at_hi > kConstraintTolerance; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double value = constraint(mid);
        if (value > radius) {
            lo = mid;
        } else {
            hi = mid;
            at_hi = value;
        }
    }
    return hi;
}

}  // namespace

Categorical geometric_path_point(const Categorical& p, double multiplier) {
    if (!(multiplier >= 0.0)) {
        throw std::invalid_argument("geometric_path_point: multiplier must be nonnegative");
    }
    if (std::isinf(multiplier)) {
        return Categorical::uniform(p.size());
    }
    return Categorical(path_row(p.probs(), multiplier));
}

BallProjection project_to_kl_ball(const Categorical& p, const KlBall& ball) {
    if (p.size() != ball.dimension()) {
        throw std::invalid_argument("project_to_kl_ball: dimension mismatch");
    }
    if (kl_to_uniform(p.probs()) <= ball.radius()) {
        return {p, 0.0};
    }
    if (ball.radius() == 0.0) {
        return {Categorical::uniform(p.size()), std::numeric_limits<double>::infinity()};
    }
    const double b = bisect_multiplier(
        [&](double mult) { return kl_to_uniform(path_row(p.probs(), mult)); }, ball.radius());
    return {geometric_path_point(p, b), b};
}

ConditionalClassifier::ConditionalClassifier(Eigen::MatrixXd rows, Eigen::VectorXd weights)
    : rows_(std::move(rows)), weights_(std::move(weights)) {
    if (rows_.rows() < 1) {
        throw std::invalid_argument("ConditionalClassifier: no rows");
    }
    if (weights_.size() != rows_.rows()) {
        throw std::invalid_argument("ConditionalClassifier: weight count does not match rows");
    }
    for (Eigen::Index n = 0; n < rows_.rows(); ++n) {
        validate_probabilities(rows_.row(n).transpose());
    }
    if ((weights_.array() < 0.0).any() || !weights_.allFinite() ||
        std::abs(weights_.sum() - 1.0) > kSumTolerance) {
        throw std::invalid_argument("ConditionalClassifier: weights must be a distribution");
    }
}

ConditionalClassifier::ConditionalClassifier(Eigen::MatrixXd rows)
    : ConditionalClassifier(rows,
                            Eigen::VectorXd::Constant(rows.rows(), 1.0 / static_cast<double>(
                                                                           std::max<Eigen::Index>(
                                                                               rows.rows(), 1)))) {}

double expected_kl(const ConditionalClassifier& q, const ConditionalClassifier& p) {
    if (q.samples() != p.samples() || q.classes() != p.classes()) {
        throw std::invalid_argument("expected_kl: classifier shapes differ");
    }
    double acc = 0.0;
    for (Eigen::Index n = 0; n < q.samples(); ++n) {
        acc += q.weights()(n) * kl_divergence(q.rows().row(n).transpose(),
                                              p.rows().row(n).transpose());
    }
    return acc;
}

double expected_kl_to_uniform(const ConditionalClassifier& q) {
    double acc = 0.0;
    for (Eigen::Index n = 0; n < q.samples(); ++n) {
        acc += q.weights()(n) * kl_to_uniform(q.rows().row(n).transpose());
    }
    return acc;
}

ClassifierProjection project_classifier(const ConditionalClassifier& cls, double radius) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("project_classifier: radius must be finite and nonnegative");
    }
    if (expected_kl_to_uniform(cls) <= radius) {
        return {cls, 0.0};
    }
    const Eigen::Index n_rows = cls.samples();
    auto rows_at = [&](double mult) {
        Eigen::MatrixXd out(n_rows, cls.classes());
        for (Eigen::Index n = 0; n < n_rows; ++n) {
            out.row(n) = path_row(cls.rows().row(n).transpose(), mult).transpose();
        }
        return out;
    };
    auto aggregate = [&](double mult) {
        double acc = 0.0;
        for (Eigen::Index n = 0; n < n_rows; ++n) {
            acc += cls.weights()(n) * kl_to_uniform(path_row(cls.rows().row(n).transpose(), mult));
        }
        return acc;
    };
    const double b = radius == 0.0 ? std::numeric_limits<double>::infinity()
                                   : bisect_multiplier(aggregate, radius);
    if (std::isinf(b)) {
        Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(
            n_rows, cls.classes(), 1.0 / static_cast<double>(cls.classes()));
        return {ConditionalClassifier(std::move(uniform), cls.weights()), b};
    }
    return {ConditionalClassifier(rows_at(b), cls.weights()), b};
}

double check_pythagorean(const Categorical& q, const Categorical& p, const KlBall& ball) {
    if (q.size() != ball.dimension() || p.size() != ball.dimension()) {
        throw std::invalid_argument("check_pythagorean: dimension mismatch");
    }
    if (!ball.contains(q, kConstraintTolerance)) {
        throw std::invalid_argument("check_pythagorean: Q lies outside the ball");
    }
    const Categorical projected = project_to_kl_ball(p, ball).point;
    return kl_divergence(q, p) - kl_divergence(q, projected) - kl_divergence(projected, p);
}

CrossEntropyPair check_prop1(const ConditionalClassifier& prev, const ConditionalClassifier& cur,
                             double radius) {
    if (prev.samples() != cur.samples() || prev.classes() != cur.classes()) {
        throw std::invalid_argument("check_prop1: classifier shapes differ");
    }
    if (expected_kl_to_uniform(prev) > radius + kConstraintTolerance) {
        throw std::invalid_argument("check_prop1: previous classifier violates the radius");
    }
    const ConditionalClassifier current(cur.rows(), prev.weights());
    const ConditionalClassifier projected = project_classifier(current, radius).classifier;

    auto cross_entropy = [&](const ConditionalClassifier& target) {
        double acc = 0.0;
        for (Eigen::Index n = 0; n < prev.samples(); ++n) {
            double row = 0.0;
            for (Eigen::Index y = 0; y < prev.classes(); ++y) {
                const double w = prev.rows()(n, y);
                if (w > 0.0) {
                    row -= w * floored_log(target.rows()(n, y));
                }
            }
            acc += prev.weights()(n) * row;
        }
        return acc;
    };
    return {cross_entropy(current), cross_entropy(projected)};
}

}  // namespace cplab::info
