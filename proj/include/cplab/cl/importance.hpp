#pragma once

#include "cplab/nn/mlp.hpp"
#include "cplab/nn/parameters.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>

namespace cplab::cl {

struct ImportanceTag;
/// Per-parameter nonnegative weights, laid out like the parameters.
using ImportanceMap = nn::FlatParams<ImportanceTag>;

/// Parameter snapshot taken at the end of a task.
struct Anchor {
    nn::ParameterSet params;
};

/// Throws std::domain_error on a negative or non-finite entry.
void validate_importance(const ImportanceMap& omega);

enum class Accumulation { sum, replace };

/// sum: elementwise total + fresh; replace: fresh.
ImportanceMap accumulate_importance(const ImportanceMap& total, const ImportanceMap& fresh,
                                    Accumulation mode);

/// Diagonal empirical Fisher with the true labels:
/// omega_i = mean_n (d log p(y_n | x_n) / d theta_i)^2.
ImportanceMap ewc_fisher(const nn::MlpSpec& spec, const nn::ParameterSet& params,
                         const nn::Batch& data, std::size_t task);

/// Label-free sensitivity: omega_i = mean_n |d ||softmax(x_n)||^2 / d theta_i|.
ImportanceMap mas_importance(const nn::MlpSpec& spec, const nn::ParameterSet& params,
                             const Eigen::MatrixXd& inputs, std::size_t task);

/// Per-step accumulators for the path-integral methods (SI and RWalk).
struct PathState {
    Eigen::VectorXd si_path;        ///< SI: running sum of -g * dtheta
    Eigen::VectorXd rwalk_fisher;   ///< RWalk: EMA of squared gradients
    Eigen::VectorXd rwalk_score;    ///< RWalk: accumulated path score
    double damping = 0.1;           ///< xi
    std::uint64_t tracked_steps = 0;

    explicit PathState(Eigen::Index size, double damping = 0.1);
    static PathState like(const nn::ParameterSet& params, double damping = 0.1) {
        return PathState(params.size(), damping);
    }
};

/// w_i += -grad_i * (new_i - old_i).
void si_step(PathState& state, const nn::GradientSet& grad, const nn::ParameterSet& old_params,
             const nn::ParameterSet& new_params);

/// omega_i = max(0, w_i) / ((end_i - start_i)^2 + xi); resets the path sums.
ImportanceMap si_consolidate(PathState& state, const nn::ParameterSet& params_end,
                             const Anchor& task_start, double xi);

/// F_i <- a F_i + (1 - a) g_i^2, then s_i += -g_i dtheta_i / (F_i dtheta_i^2 / 2 + xi).
void rwalk_update(PathState& state, const nn::GradientSet& grad,
                  const nn::ParameterSet& old_params, const nn::ParameterSet& new_params,
                  double ema_alpha);

/// omega_i = F_i + max(0, s_i); the score is then halved.
ImportanceMap rwalk_consolidate(PathState& state, const nn::ParameterSet& like);

}  // namespace cplab::cl
