#include "cplab/nn/hessian.hpp"

#include "cplab/rng.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace cplab::nn {

LossContext::LossContext(ValueFn value, GradientFn gradient)
    : value_(std::move(value)), gradient_(std::move(gradient)) {}

LossContext LossContext::network(MlpSpec spec, Batch batch, std::size_t task, double beta,
                                 info::Categorical g) {
    struct Bound {
        MlpSpec spec;
        Batch batch;
        std::size_t task;
        double beta;
        info::Categorical g;
        std::shared_ptr<const Layout> layout;
    };
    auto layout = make_layout(spec);
    auto bound = std::make_shared<const Bound>(
        Bound{std::move(spec), std::move(batch), task, beta, std::move(g), std::move(layout)});
    return LossContext(
        [bound](const Eigen::VectorXd& theta) {
            ParameterSet p(bound->layout, theta);
            return loss_and_grad(bound->spec, p, bound->batch, bound->task, bound->beta, bound->g)
                .loss;
        },
        [bound](const Eigen::VectorXd& theta) {
            ParameterSet p(bound->layout, theta);
            return loss_and_grad(bound->spec, p, bound->batch, bound->task, bound->beta, bound->g)
                .grad.values();
        });
}

double default_fd_step(const Eigen::VectorXd& theta) {
    const double top = theta.size() > 0 ? theta.cwiseAbs().maxCoeff() : 0.0;
    return 1e-4 * (1.0 + top);
}

Eigen::VectorXd hessian_vector_product(const LossContext& ctx, const Eigen::VectorXd& theta,
                                       const Eigen::VectorXd& v, std::optional<double> fd_step) {
    if (v.size() != theta.size()) {
        throw std::invalid_argument("hessian_vector_product: direction size mismatch");
    }
    const double norm = v.norm();
    if (!(norm > 0.0)) {
        throw std::invalid_argument("hessian_vector_product: zero direction");
    }
    const double h = fd_step.value_or(default_fd_step(theta));
    if (!(h > 0.0)) {
        throw std::invalid_argument("hessian_vector_product: step must be positive");
    }
    const Eigen::VectorXd unit = v / norm;
    const Eigen::VectorXd plus = ctx.gradient(theta + h * unit);
    const Eigen::VectorXd minus = ctx.gradient(theta - h * unit);
    return (plus - minus) * (norm / (2.0 * h));
}

namespace {

struct PowerResult {
    double lambda = 0.0;
    Eigen::VectorXd vec;
    int iterations = 0;
    bool converged = false;
};

void orthogonalize(Eigen::VectorXd& v, const Eigen::VectorXd* against) {
    if (against != nullptr) {
        // Twice is enough to stay orthogonal to machine precision.
        v -= v.dot(*against) * (*against);
        v -= v.dot(*against) * (*against);
    }
}

PowerResult power_iterate(const LossContext& ctx, const Eigen::VectorXd& theta, int max_iters,
                          double tol, Rng& rng, const Eigen::VectorXd* deflate) {
    Eigen::VectorXd v(theta.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = rng.normal();
    }
    orthogonalize(v, deflate);
    v.normalize();

    PowerResult out;
    double previous = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        Eigen::VectorXd w = hessian_vector_product(ctx, theta, v);
        orthogonalize(w, deflate);
        const double lambda = v.dot(w);
        out.lambda = lambda;
        out.iterations = it;
        const double wnorm = w.norm();
        if (!(wnorm > 0.0)) {
            // H v = 0 on the remaining subspace: v is an eigenvector for 0.
            out.vec = v;
            out.converged = true;
            return out;
        }
        const bool settled = it > 1 && std::abs(lambda - previous) <= tol * std::abs(lambda);
        v = w / wnorm;
        previous = lambda;
        if (settled) {
            out.converged = true;
            break;
        }
    }
    orthogonalize(v, deflate);
    out.vec = v.normalized();
    return out;
}

}  // namespace

HessianEigenpairs top2_hessian_eigs(const LossContext& ctx, const Eigen::VectorXd& theta,
                                    int max_iters, double tol, std::uint64_t seed) {
    if (max_iters < 1) {
        throw std::invalid_argument("top2_hessian_eigs: max_iters must be at least 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("top2_hessian_eigs: tol must be positive");
    }
    if (theta.size() < 2) {
        throw std::invalid_argument("top2_hessian_eigs: need at least two parameters");
    }
    Rng rng(derive_seed(seed, {0x4865737369616eULL}));
    PowerResult first = power_iterate(ctx, theta, max_iters, tol, rng, nullptr);
    PowerResult second = power_iterate(ctx, theta, max_iters, tol, rng, &first.vec);

    HessianEigenpairs out;
    out.lambda1 = first.lambda;
    out.v1 = std::move(first.vec);
    out.lambda2 = second.lambda;
    out.v2 = std::move(second.vec);
    out.iterations1 = first.iterations;
    out.iterations2 = second.iterations;
    out.converged = first.converged && second.converged;
    if (!first.converged) {
        out.warning = "first eigenpair did not converge in " + std::to_string(max_iters) +
                      " iterations";
    } else if (!second.converged) {
        out.warning = "second eigenpair did not converge in " + std::to_string(max_iters) +
                      " iterations";
    }
    return out;
}

}  // namespace cplab::nn
