#pragma once

#include "cplab/info/categorical.hpp"
#include "cplab/nn/mlp.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace cplab::nn {

/// A loss bound to fixed data so that value and gradient depend on the flat
/// parameter vector alone.
class LossContext {
public:
    using ValueFn = std::function<double(const Eigen::VectorXd&)>;
    using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

    LossContext(ValueFn value, GradientFn gradient);

    /// Binds (spec, batch, task, beta, g) through loss_and_grad.
    static LossContext network(MlpSpec spec, Batch batch, std::size_t task, double beta,
                               info::Categorical g);

    [[nodiscard]] double value(const Eigen::VectorXd& theta) const { return value_(theta); }
    [[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
        return gradient_(theta);
    }

private:
    ValueFn value_;
    GradientFn gradient_;
};

/// 1e-4 * (1 + max_i |theta_i|).
double default_fd_step(const Eigen::VectorXd& theta);

/// Central difference of gradients along the unit direction v/|v|, rescaled by |v|.
/// Throws std::invalid_argument for a zero direction.
Eigen::VectorXd hessian_vector_product(const LossContext& ctx, const Eigen::VectorXd& theta,
                                       const Eigen::VectorXd& v,
                                       std::optional<double> fd_step = std::nullopt);

struct HessianEigenpairs {
    double lambda1 = 0.0;
    Eigen::VectorXd v1;
    double lambda2 = 0.0;
    Eigen::VectorXd v2;
    int iterations1 = 0;
    int iterations2 = 0;
    bool converged = false;
    /// Empty when both power iterations met the tolerance.
    std::string warning;
};

/// Power iteration for the dominant Hessian eigenpair, then again with iterates
/// kept orthogonal to v1 for the second. Convergence: relative change of the
/// Rayleigh quotient below `tol`. Non-convergence is reported, not thrown.
HessianEigenpairs top2_hessian_eigs(const LossContext& ctx, const Eigen::VectorXd& theta,
                                    int max_iters, double tol, std::uint64_t seed = 0);

}  // namespace cplab::nn
