#include "cplab/cl/importance.hpp"

#include "cplab/info/categorical.hpp"

#include <cmath>
#include <stdexcept>

namespace cplab::cl {

void validate_importance(const ImportanceMap& omega) {
    const auto& v = omega.values();
    if (!v.allFinite() || (v.array() < 0.0).any()) {
        throw std::domain_error("importance map has negative or non-finite entries");
    }
}

ImportanceMap accumulate_importance(const ImportanceMap& total, const ImportanceMap& fresh,
                                    Accumulation mode) {
    nn::require_congruent(total, fresh, "accumulate_importance");
    if (mode == Accumulation::replace) {
        return fresh;
    }
    return ImportanceMap(total.layout_ptr(), total.values() + fresh.values());
}

ImportanceMap ewc_fisher(const nn::MlpSpec& spec, const nn::ParameterSet& params,
                         const nn::Batch& data, std::size_t task) {
    if (task >= spec.num_heads()) {
        throw std::out_of_range("ewc_fisher: task has no head");
    }
    data.validate(spec.head_dims[task]);
    const nn::ForwardPass fp = nn::forward(spec, params, data.inputs, task);
    // d log max(p_y, floor) / d logits = onehot(y) - p, or zero below the floor.
    Eigen::MatrixXd dlogits = -fp.probs;
    for (Eigen::Index n = 0; n < data.size(); ++n) {
        const auto y = static_cast<Eigen::Index>(data.labels[static_cast<std::size_t>(n)]);
        if (fp.probs(n, y) <= info::kLogFloor) {
            dlogits.row(n).setZero();
        } else {
            dlogits(n, y) += 1.0;
        }
    }
    nn::GradientSet sums =
        nn::per_sample_gradient_sums(spec, params, fp, dlogits, nn::SampleReduction::squared);
    return ImportanceMap(params.layout_ptr(), sums.values() / static_cast<double>(data.size()));
}

ImportanceMap mas_importance(const nn::MlpSpec& spec, const nn::ParameterSet& params,
                             const Eigen::MatrixXd& inputs, std::size_t task) {
    if (inputs.rows() < 1) {
        throw std::invalid_argument("mas_importance: no inputs");
    }
    const nn::ForwardPass fp = nn::forward(spec, params, inputs, task);
    // d sum_m p_m^2 / d z_k = 2 p_k (p_k - sum_m p_m^2)
    const Eigen::VectorXd sq = fp.probs.rowwise().squaredNorm();
    const Eigen::MatrixXd dlogits =
        2.0 * fp.probs.cwiseProduct((fp.probs.colwise() - sq));
    nn::GradientSet sums =
        nn::per_sample_gradient_sums(spec, params, fp, dlogits, nn::SampleReduction::absolute);
    return ImportanceMap(params.layout_ptr(), sums.values() / static_cast<double>(inputs.rows()));
}

PathState::PathState(Eigen::Index size, double damping_)
    : si_path(Eigen::VectorXd::Zero(size)),
      rwalk_fisher(Eigen::VectorXd::Zero(size)),
      rwalk_score(Eigen::VectorXd::Zero(size)),
      damping(damping_) {
    if (!(damping_ > 0.0)) {
        throw std::invalid_argument("PathState: damping must be positive");
    }
}

namespace {

void check_step_shapes(const PathState& state, const nn::GradientSet& grad,
                       const nn::ParameterSet& old_params, const nn::ParameterSet& new_params,
                       const char* what) {
    nn::require_congruent(old_params, new_params, what);
    nn::require_congruent(old_params, grad, what);
    if (state.si_path.size() != grad.size()) {
        throw std::invalid_argument(std::string(what) + ": path state shape mismatch");
    }
}

}  // namespace

void si_step(PathState& state, const nn::GradientSet& grad, const nn::ParameterSet& old_params,
             const nn::ParameterSet& new_params) {
    check_step_shapes(state, grad, old_params, new_params, "si_step");
    state.si_path.array() -=
        grad.values().array() * (new_params.values().array() - old_params.values().array());
    ++state.tracked_steps;
}

ImportanceMap si_consolidate(PathState& state, const nn::ParameterSet& params_end,
                             const Anchor& task_start, double xi) {
    if (!(xi > 0.0)) {
        throw std::invalid_argument("si_consolidate: damping must be positive");
    }
    nn::require_congruent(params_end, task_start.params, "si_consolidate");
    if (state.si_path.size() != params_end.size()) {
        throw std::invalid_argument("si_consolidate: path state shape mismatch");
    }
    const Eigen::ArrayXd delta = params_end.values().array() - task_start.params.values().array();
    Eigen::VectorXd omega = (state.si_path.array().max(0.0) / (delta.square() + xi)).matrix();
    state.si_path.setZero();
    return ImportanceMap(params_end.layout_ptr(), std::move(omega));
}

void rwalk_update(PathState& state, const nn::GradientSet& grad,
                  const nn::ParameterSet& old_params, const nn::ParameterSet& new_params,
                  double ema_alpha) {
    if (!(ema_alpha > 0.0 && ema_alpha < 1.0)) {
        throw std::invalid_argument("rwalk_update: EMA factor must lie in (0, 1)");
    }
    check_step_shapes(state, grad, old_params, new_params, "rwalk_update");
    const Eigen::ArrayXd g = grad.values().array();
    state.rwalk_fisher = (ema_alpha * state.rwalk_fisher.array() + (1.0 - ema_alpha) * g.square())
                             .matrix();
    const Eigen::ArrayXd delta = new_params.values().array() - old_params.values().array();
    state.rwalk_score.array() +=
        (-g * delta) / (0.5 * state.rwalk_fisher.array() * delta.square() + state.damping);
    ++state.tracked_steps;
}

ImportanceMap rwalk_consolidate(PathState& state, const nn::ParameterSet& like) {
    if (state.rwalk_fisher.size() != like.size()) {
        throw std::invalid_argument("rwalk_consolidate: path state shape mismatch");
    }
    Eigen::VectorXd omega = state.rwalk_fisher + state.rwalk_score.cwiseMax(0.0);
    state.rwalk_score *= 0.5;
    return ImportanceMap(like.layout_ptr(), std::move(omega));
}

}  // namespace cplab::cl
