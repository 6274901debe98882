#include "cplab/probes/landscape.hpp"

#include "cplab/harness/persist.hpp"
#include "cplab/info/categorical.hpp"

#include <stdexcept>

namespace cplab::probes {

LandscapeGrid landscape_grid(const nn::LossContext& ctx, const Eigen::VectorXd& theta, double radius,
                             std::size_t resolution, int power_iters, double tol,
                             std::uint64_t seed) {
    if (!(radius >= 0.0)) {
        throw std::invalid_argument("landscape: radius must be nonnegative");
    }
    if (resolution < 3 || resolution % 2 == 0) {
        throw std::invalid_argument("landscape: resolution must be odd and at least 3");
    }
    LandscapeGrid grid;
    grid.eigen = nn::top2_hessian_eigs(ctx, theta, power_iters, tol, seed);
    grid.converged = grid.eigen.converged;
    grid.warning = grid.eigen.warning;

    const auto g = static_cast<Eigen::Index>(resolution);
    grid.coords.resize(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        grid.coords(i) = radius * static_cast<double>(2 * i - (g - 1)) / static_cast<double>(g - 1);
    }
    grid.loss.resize(g, g);
    for (Eigen::Index i = 0; i < g; ++i) {
        for (Eigen::Index j = 0; j < g; ++j) {
            const Eigen::VectorXd point =
                theta + grid.coords(i) * grid.eigen.v1 + grid.coords(j) * grid.eigen.v2;
            grid.loss(i, j) = ctx.value(point);
        }
    }
    return grid;
}

LandscapeGrid landscape_probe(const nn::MlpSpec& spec, const nn::ParameterSet& params,
                              const nn::Batch& data, std::size_t task, double radius,
                              std::size_t resolution, int power_iters, double tol,
                              std::uint64_t seed) {
    if (task >= spec.num_heads()) {
        throw std::out_of_range("landscape: task has no head");
    }
    const nn::LossContext ctx = nn::LossContext::network(
        spec, data, task, 0.0, info::Categorical::uniform(spec.head_dims[task]));
    return landscape_grid(ctx, params.values(), radius, resolution, power_iters, tol, seed);
}

std::string landscape_csv(const LandscapeGrid& grid) {
    std::string out = "alpha,gamma,loss\n";
    for (Eigen::Index i = 0; i < grid.coords.size(); ++i) {
        for (Eigen::Index j = 0; j < grid.coords.size(); ++j) {
            out += harness::format_fixed6(grid.coords(i)) + ',' + harness::format_fixed6(grid.coords(j)) +
                   ',' + harness::format_fixed6(grid.loss(i, j)) + '\n';
        }
    }
    return out;
}

std::string landscape_eigen_csv(const LandscapeGrid& grid) {
    return "lambda1,lambda2,iterations1,iterations2,converged\n" +
           harness::format_fixed6(grid.eigen.lambda1) + ',' + harness::format_fixed6(grid.eigen.lambda2) +
           ',' + std::to_string(grid.eigen.iterations1) + ',' + std::to_string(grid.eigen.iterations2) +
           ',' + (grid.converged ? "1" : "0") + '\n';
}

}  // namespace cplab::probes
