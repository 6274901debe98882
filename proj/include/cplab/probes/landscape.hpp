#pragma once

#include "cplab/nn/hessian.hpp"
#include "cplab/nn/mlp.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>

namespace cplab::probes {

struct LandscapeGrid {
    Eigen::VectorXd coords;  ///< G evenly spaced values in [-r, r]; the middle one is exactly 0
    Eigen::MatrixXd loss;    ///< loss(alpha_i, gamma_j) at theta + alpha v1 + gamma v2
    nn::HessianEigenpairs eigen;
    bool converged = false;
    std::string warning;

    [[nodiscard]] double center() const {
        const Eigen::Index c = coords.size() / 2;
        return loss(c, c);
    }
};

/// Loss over the plane spanned by the top two Hessian eigenvectors of `ctx` at theta.
LandscapeGrid landscape_grid(const nn::LossContext& ctx, const Eigen::VectorXd& theta, double radius,
                             std::size_t resolution, int power_iters, double tol,
                             std::uint64_t seed = 0);

/// landscape_grid of head `task`'s mean CE on `data` (no penalties).
LandscapeGrid landscape_probe(const nn::MlpSpec& spec, const nn::ParameterSet& params,
                              const nn::Batch& data, std::size_t task, double radius,
                              std::size_t resolution, int power_iters, double tol,
                              std::uint64_t seed = 0);

inline constexpr double kDefaultLandscapeRadius = 0.5;
inline constexpr std::size_t kDefaultLandscapeResolution = 21;
inline constexpr int kDefaultPowerIters = 200;
inline constexpr double kDefaultPowerTol = 1e-6;

std::string landscape_csv(const LandscapeGrid& grid);
std::string landscape_eigen_csv(const LandscapeGrid& grid);

}  // namespace cplab::probes
