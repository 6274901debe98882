#include "cplab/probes/landscape.hpp"
#include "cplab/probes/noise.hpp"

#include "cplab/harness/trainer.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cplab;
using namespace cplab::probes;

namespace {

nn::ParameterSet vector_params(Eigen::Index n, double fill) {
    nn::MlpSpec spec;
    spec.input_dim = static_cast<std::size_t>(n - 1);
    spec.head_dims = {1};
    nn::ParameterSet p = nn::ParameterSet::zeros(nn::make_layout(spec));
    p.values().setConstant(fill);
    return p;
}

nn::LossContext quadratic(const Eigen::MatrixXd& a) {
    return nn::LossContext([a](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x); },
                           [a](const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); });
}

}  // namespace

TEST_CASE("noise: sigma 0 changes nothing, seeds reproduce") {
    const nn::ParameterSet p = vector_params(10, 0.3);
    const ParameterLoss loss = [](const nn::ParameterSet& q) { return q.values().squaredNorm(); };
    const NoiseProbeReport a = perturbation_curve(loss, p, kDefaultSigmas, 5, 1);
    const NoiseProbeReport b = perturbation_curve(loss, p, kDefaultSigmas, 5, 1);
    REQUIRE(a.samples.size() == 30);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].loss == b.samples[i].loss);
        if (a.samples[i].sigma == 0.0) CHECK(a.samples[i].loss_increase == 0.0);
    }
    CHECK(a.summary.size() == 6);
}

TEST_CASE("noise: quadratic loss increase is half lambda sigma^2 dim") {
    const Eigen::Index dim = 50;
    const double lambda = 2.0, sigma = 0.1;
    const nn::ParameterSet p = vector_params(dim, 0.0);
    const ParameterLoss loss = [&](const nn::ParameterSet& q) { return 0.5 * lambda * q.values().squaredNorm(); };
    const NoiseProbeReport r = perturbation_curve(loss, p, {0.0, sigma}, 1000, 3);
    const double expected = 0.5 * lambda * sigma * sigma * static_cast<double>(dim);
    // Per-trial std is lambda sigma^2 sqrt(dim / 2); five standard errors.
    const double tol = 5.0 * lambda * sigma * sigma * std::sqrt(dim / 2.0) / std::sqrt(1000.0);
    CHECK(std::abs(r.mean_increase_at(sigma) - expected) < tol);
}

TEST_CASE("noise: argument checks") {
    const nn::ParameterSet p = vector_params(3, 0.0);
    const ParameterLoss loss = [](const nn::ParameterSet&) { return 0.0; };
    CHECK_THROWS(perturbation_curve(loss, p, {0.0, 0.0}, 1, 1));
    CHECK_THROWS(perturbation_curve(loss, p, {0.02, 0.01}, 1, 1));
    CHECK_THROWS(perturbation_curve(loss, p, {0.0}, 0, 1));
}

TEST_CASE("noise: csv layout") {
    const nn::ParameterSet p = vector_params(3, 0.0);
    const ParameterLoss loss = [](const nn::ParameterSet& q) { return q.values().squaredNorm(); };
    const NoiseProbeReport r = perturbation_curve(loss, p, {0.0}, 1, 1);
    CHECK(noise_csv(r) == "task,sigma,trial,loss,loss_increase\n1,0.000000,1,0.000000,0.000000\n");
    CHECK(noise_summary_csv(r) == "task,sigma,mean,std\n1,0.000000,0.000000,0.000000\n");
}

TEST_CASE("noise probe on a trained network covers every task") {
    harness::ExperimentConfig c;
    c.hidden_dims = {6};
    c.epochs = 1;
    c.generator.num_tasks = 2;
    c.generator.input_dim = 3;
    c.generator.train_per_class = 32;
    const harness::TaskSequence tasks = harness::make_tasks_for(c);
    const harness::RunResult run = harness::run_continual(c, tasks);
    const NoiseProbeReport r = noise_probe(run.spec, run.final_params, tasks, Split::test, {0.0, 0.05}, 3, 9);
    CHECK(r.samples.size() == 2 * 2 * 3);
    CHECK(r.summary.size() == 4);
    CHECK(r.samples[0].loss == doctest::Approx(nn::cross_entropy(run.spec, run.final_params, tasks.tasks[0].test, 0)).epsilon(1e-14));
}

TEST_CASE("landscape: quadratic grid matches the closed form") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    a.diagonal() << 4.0, 2.0, 0.5;
    const Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
    const LandscapeGrid g = landscape_grid(quadratic(a), theta, 0.5, 5, 500, 1e-12, 1);
    CHECK(g.converged);
    CHECK(g.eigen.lambda1 == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(g.eigen.lambda2 == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(g.coords(2) == 0.0);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) {
            const Eigen::VectorXd x = theta + g.coords(i) * g.eigen.v1 + g.coords(j) * g.eigen.v2;
            CHECK(std::abs(g.loss(i, j) - 0.5 * x.dot(a * x)) < 1e-8);
            CHECK(std::abs(g.loss(i, j) - g.loss(4 - i, 4 - j)) < 1e-12);
        }
}

TEST_CASE("landscape: zero radius collapses to the center, bad resolution rejected") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2) * 3.0 + Eigen::MatrixXd::Ones(2, 2);
    const Eigen::VectorXd theta = Eigen::VectorXd::Ones(2);
    const LandscapeGrid g = landscape_grid(quadratic(a), theta, 0.0, 3, 100, 1e-9);
    CHECK((g.loss.array() == g.center()).all());
    CHECK(g.center() == 0.5 * theta.dot(a * theta));
    CHECK_THROWS(landscape_grid(quadratic(a), theta, 0.5, 4, 100, 1e-9));
    CHECK_THROWS(landscape_grid(quadratic(a), theta, 0.5, 1, 100, 1e-9));
}

TEST_CASE("landscape probe: center equals the clean loss, csv layout") {
    nn::MlpSpec spec;
    spec.input_dim = 3;
    spec.hidden_dims = {3};
    spec.head_dims = {2};
    Rng rng(5);
    const nn::ParameterSet p = nn::init_params(spec, 6);
    const nn::Batch data = testing::random_batch(10, 3, 2, rng);
    const LandscapeGrid g = landscape_probe(spec, p, data, 0, 0.5, 3, 50, 1e-6);
    CHECK(std::abs(g.center() - nn::cross_entropy(spec, p, data, 0)) <= 1e-12);
    const std::string csv = landscape_csv(g);
    CHECK(csv.rfind("alpha,gamma,loss\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
    CHECK(landscape_eigen_csv(g).rfind("lambda1,lambda2,iterations1,iterations2,converged\n", 0) == 0);
}
