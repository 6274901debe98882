#include "cplab/harness/trainer.hpp"

#include "cplab/cl/penalty.hpp"
#include "cplab/info/categorical.hpp"
#include "cplab/nn/mlp.hpp"
#include "cplab/nn/optimizer.hpp"
#include "cplab/rng.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace cplab::harness {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kShuffleStream = 0x73687566ULL;

std::string describe(const StepRecord& r, double loss) {
    std::ostringstream os;
    os << "non-finite objective " << loss << " at task " << r.task + 1 << ", epoch "
       << r.epoch + 1 << ", step " << r.step;
    return os.str();
}

}  // namespace

NonFiniteLoss::NonFiniteLoss(StepRecord where, const std::string& detail)
    : std::runtime_error(detail), where_(where) {}

nn::MlpSpec network_for(const ExperimentConfig& config, const TaskSequence& tasks) {
    nn::MlpSpec spec;
    spec.input_dim = tasks.input_dim;
    spec.hidden_dims = config.hidden_dims;
    spec.head_dims = tasks.head_dims();
    spec.validate();
    return spec;
}

TaskSequence make_tasks_for(const ExperimentConfig& config) {
    return make_tasks(config.generator, derive_seed(config.seed, {0x7461736b73ULL}));
}

RunResult run_continual(const ExperimentConfig& config, const TaskSequence& tasks) {
    config.validate();
    if (tasks.size() == 0) {
        throw std::invalid_argument("run_continual: empty task sequence");
    }
    const nn::MlpSpec spec = network_for(config, tasks);
    nn::ParameterSet params = nn::init_params(spec, derive_seed(config.seed, {kInitStream}));

    RunResult result{AccuracyMatrix(tasks.size()), spec, params, {}, {}, {}, std::nullopt};

    const bool penalized = config.method != Method::none && config.lambda > 0.0;
    const bool tracks_path = config.method == Method::si || config.method == Method::rwalk;
    const double beta = config.wlm == WlmMode::cpr ? config.beta : 0.0;
    const double smoothing = config.wlm == WlmMode::ls ? config.ls_alpha : 0.0;

    std::optional<cl::Anchor> anchor;
    std::optional<cl::ImportanceMap> omega;
    cl::PathState path = cl::PathState::like(params, config.si_damping);

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const Task& task = tasks.tasks[t];
        task.train.validate(task.num_classes);
        const info::Categorical uniform = info::Categorical::uniform(task.num_classes);
        const cl::Anchor task_start{params};
        nn::OptimizerState opt(config.optimizer, params);

        std::vector<Eigen::Index> order(static_cast<std::size_t>(task.train.size()));
        std::size_t step = 0;
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            Rng rng(derive_seed(config.seed, {kShuffleStream, t, epoch}));
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[rng.below(i)]);
            }
            for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
                const std::size_t stop = std::min(order.size(), start + config.batch_size);
                const nn::Batch batch = task.train.subset(
                    std::vector<Eigen::Index>(order.begin() + static_cast<std::ptrdiff_t>(start),
                                              order.begin() + static_cast<std::ptrdiff_t>(stop)));

                nn::LossAndGrad task_loss =
                    nn::loss_and_grad(spec, params, batch, t, beta, uniform, smoothing);
                StepRecord record{t, epoch, step, task_loss.loss, 0.0};
                nn::GradientSet total = task_loss.grad;
                if (penalized && anchor && omega) {
                    cl::PenaltyValue pen = cl::quadratic_penalty(params, *anchor, *omega, config.lambda);
                    record.penalty = pen.value;
                    total.values() += pen.grad.values();
                }
                const double objective = record.task_loss + record.penalty;
                if (!std::isfinite(objective) || !total.all_finite()) {
                    throw NonFiniteLoss(record, describe(record, objective));
                }
                result.log.push_back(record);

                if (tracks_path) {
                    const nn::ParameterSet before = params;
                    nn::apply_update(params, total, opt);
                    if (config.method == Method::si) {
                        cl::si_step(path, task_loss.grad, before, params);
                    } else {
                        cl::rwalk_update(path, task_loss.grad, before, params, config.rwalk_alpha);
                    }
                } else {
                    nn::apply_update(params, total, opt);
                }
                ++step;
            }
        }

        if (config.method != Method::none) {
            cl::ImportanceMap fresh = [&]() {
                switch (config.method) {
                    case Method::ewc: return cl::ewc_fisher(spec, params, task.train, t);
                    case Method::mas: return cl::mas_importance(spec, params, task.train.inputs, t);
                    case Method::si: return cl::si_consolidate(path, params, task_start, config.si_damping);
                    case Method::rwalk: return cl::rwalk_consolidate(path, params);
                    case Method::none: break;
                }
                return cl::ImportanceMap::zeros_like(params);
            }();
            cl::validate_importance(fresh);
            omega = omega ? cl::accumulate_importance(*omega, fresh, config.accumulation)
                          : std::move(fresh);
        }
        anchor = cl::Anchor{params};
        result.checkpoints.push_back(params);

        for (std::size_t j = 0; j <= t; ++j) {
            const double a = nn::accuracy(spec, params, tasks.tasks[j].test, j);
            result.accuracy.set(t, j, a);
            result.evaluations.push_back({t, j, j, a});
        }
    }
    result.final_params = params;
    result.importance = std::move(omega);
    return result;
}

ExperimentConfig finetune_config(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.method = Method::none;
    c.lambda = 0.0;
    c.wlm = WlmMode::off;
    return c;
}

std::vector<double> finetune_baseline(const ExperimentConfig& config, const TaskSequence& tasks) {
    return run_continual(finetune_config(config), tasks).accuracy.diagonal();
}

}  // namespace cplab::harness
