#include "cplab/harness/trainer.hpp"

#include <doctest.h>

#include <cmath>

using namespace cplab;
using namespace cplab::harness;

namespace {

ExperimentConfig small_config(Method method, double lambda, double beta) {
    ExperimentConfig c;
    c.method = method;
    c.lambda = lambda;
    c.beta = beta;
    c.hidden_dims = {8};
    c.epochs = 1;
    c.batch_size = 32;
    c.generator.num_tasks = 3;
    c.generator.input_dim = 4;
    c.generator.train_per_class = 64;
    c.generator.test_per_class = 32;
    c.seed = 11;
    return c;
}

}  // namespace

TEST_CASE("trainer: lambda 0 and beta 0 match fine-tuning bit for bit") {
    const ExperimentConfig c = small_config(Method::ewc, 0.0, 0.0);
    const TaskSequence tasks = make_tasks_for(c);
    const RunResult a = run_continual(c, tasks);
    const RunResult b = run_continual(finetune_config(c), tasks);
    CHECK(a.final_params.values() == b.final_params.values());
    CHECK(a.accuracy == b.accuracy);
    CHECK(finetune_baseline(c, tasks) == b.accuracy.diagonal());
}

TEST_CASE("trainer: deterministic under seed, sensitive to it") {
    const ExperimentConfig c = small_config(Method::si, 1.0, 0.5);
    const TaskSequence tasks = make_tasks_for(c);
    const RunResult a = run_continual(c, tasks);
    const RunResult b = run_continual(c, tasks);
    CHECK(a.final_params.values() == b.final_params.values());
    CHECK(a.accuracy == b.accuracy);
    ExperimentConfig other = c;
    other.seed = 12;
    CHECK(run_continual(other, tasks).final_params.values() != a.final_params.values());
}

TEST_CASE("trainer: every method runs and fills the matrix with head j on task j") {
    for (Method m : {Method::none, Method::ewc, Method::si, Method::mas, Method::rwalk}) {
        ExperimentConfig c = small_config(m, 1.0, 0.5);
        if (m == Method::rwalk) c.wlm = WlmMode::ls;
        const RunResult r = run_continual(c, make_tasks_for(c));
        CHECK(r.accuracy.complete());
        CHECK(r.checkpoints.size() == 3);
        CHECK(r.evaluations.size() == 6);
        for (const EvaluationRecord& e : r.evaluations) CHECK(e.head == e.task);
        CHECK_FALSE(r.log.empty());
        if (m != Method::none) {
            REQUIRE(r.importance.has_value());
            CHECK((r.importance->values().array() >= 0.0).all());
        }
    }
}

TEST_CASE("trainer: one separable task reaches high accuracy") {
    ExperimentConfig c = small_config(Method::none, 0.0, 0.0);
    c.generator.num_tasks = 1;
    c.generator.separation = 3.0;
    c.generator.train_per_class = 200;
    c.generator.test_per_class = 200;
    c.epochs = 10;
    c.optimizer.learning_rate = 1e-2;
    const TaskSequence tasks = make_tasks_for(c);
    const auto base = finetune_baseline(c, tasks);
    REQUIRE(base.size() == 1);
    CHECK(base[0] >= 0.95);
    CHECK(run_continual(c, tasks).accuracy.at(0, 0) == base[0]);
}

TEST_CASE("trainer: diverging run raises a diagnostic") {
    ExperimentConfig c = small_config(Method::ewc, 1e308, 0.0);
    c.optimizer.mode = nn::OptimizerMode::sgd;
    c.optimizer.learning_rate = 1e3;
    CHECK_THROWS_AS(run_continual(c, make_tasks_for(c)), NonFiniteLoss);
}
