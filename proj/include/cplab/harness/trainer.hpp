#pragma once

#include "cplab/cl/importance.hpp"
#include "cplab/harness/config.hpp"
#include "cplab/harness/metrics.hpp"
#include "cplab/harness/tasks.hpp"
#include "cplab/nn/parameters.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cplab::harness {

struct StepRecord {
    std::size_t task = 0;
    std::size_t epoch = 0;
    std::size_t step = 0;
    double task_loss = 0.0;  ///< CE (+ output regularizer) on the mini-batch
    double penalty = 0.0;    ///< quadratic anchor penalty
};

/// Which head and split produced a[k][j].
struct EvaluationRecord {
    std::size_t after_task = 0;
    std::size_t task = 0;
    std::size_t head = 0;
    double accuracy = 0.0;
};

/// Raised when the training objective becomes non-finite.
class NonFiniteLoss : public std::runtime_error {
public:
    NonFiniteLoss(StepRecord where, const std::string& detail);
    [[nodiscard]] const StepRecord& where() const noexcept { return where_; }

private:
    StepRecord where_;
};

struct RunResult {
    AccuracyMatrix accuracy;
    nn::MlpSpec spec;
    nn::ParameterSet final_params;
    /// Parameters after each task.
    std::vector<nn::ParameterSet> checkpoints;
    std::vector<StepRecord> log;
    std::vector<EvaluationRecord> evaluations;
    std::optional<cl::ImportanceMap> importance;
};

/// Network for a task sequence: config.hidden_dims trunk, one head per task.
nn::MlpSpec network_for(const ExperimentConfig& config, const TaskSequence& tasks);

/// Task sequence of a run: the configured generator under a stream derived from config.seed.
TaskSequence make_tasks_for(const ExperimentConfig& config);

/// Trains the tasks in order on CE + output regularizer + lambda * quadratic
/// anchor penalty, consolidating importance after each task and evaluating
/// every seen task on its test split with its own head.
RunResult run_continual(const ExperimentConfig& config, const TaskSequence& tasks);

/// a*_j: the diagonal of the same loop with lambda = 0 and no output regularizer.
std::vector<double> finetune_baseline(const ExperimentConfig& config, const TaskSequence& tasks);

/// The configuration finetune_baseline trains with.
ExperimentConfig finetune_config(const ExperimentConfig& config);

}  // namespace cplab::harness
