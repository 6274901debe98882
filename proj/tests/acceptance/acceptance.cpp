// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//   --skip-reproduction   criteria 1-7 and 10
//   --only-reproduction   criteria 8 and 9 (the continual-learning comparison)

#include "cplab/cl/penalty.hpp"
#include "cplab/harness/idx.hpp"
#include "cplab/harness/metrics.hpp"
#include "cplab/harness/persist.hpp"
#include "cplab/harness/sweep.hpp"
#include "cplab/harness/trainer.hpp"
#include "cplab/info/projection.hpp"
#include "cplab/nn/hessian.hpp"
#include "cplab/probes/landscape.hpp"
#include "cplab/probes/noise.hpp"

#include "oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace cplab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

// Runs one criterion, timing it against `budget_s` (0 = no runtime bound).
void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && secs >= budget_s) {
        out.pass = false;
        out.detail += "; over the " + std::to_string(static_cast<int>(budget_s)) + " s budget";
    }
    std::printf("%s [%d] %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(), secs);
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome gradient_exactness() {
    Rng rng(0x6772616431ULL);
    const double betas[] = {0.0, 0.5, 2.0};
    double worst = 0.0;
    for (int cfg = 0; cfg < 50; ++cfg) {
        nn::MlpSpec spec;
        do {
            spec = {};
            spec.input_dim = 1 + rng.below(4);
            for (std::uint64_t l = 0, n = rng.below(3); l < n; ++l) spec.hidden_dims.push_back(1 + rng.below(5));
            for (std::uint64_t h = 0, n = 1 + rng.below(3); h < n; ++h) spec.head_dims.push_back(2 + rng.below(3));
        } while (nn::make_layout(spec)->size() > 100);

        // Zero biases behind a dead layer put pre-activations exactly on the ReLU
        // kink, where the derivative is undefined; jitter every parameter.
        const nn::ParameterSet params = nn::perturb(nn::init_params(spec, rng.next_u64()), 0.1, rng.next_u64());
        const std::size_t task = rng.below(spec.num_heads());
        const std::size_t m = spec.head_dims[task];
        const nn::Batch batch = testing::random_batch(1 + rng.below(6), spec.input_dim, m, rng);
        const double beta = betas[cfg % 3];
        const info::Categorical g = (cfg / 3) % 2 == 0
                                        ? info::Categorical::uniform(m)
                                        : info::Categorical::smoothed_one_hot(m, rng.below(m), 0.05 + 0.5 * rng.uniform());
        const cl::Anchor anchor{nn::init_params(spec, rng.next_u64())};
        cl::ImportanceMap omega = cl::ImportanceMap::zeros_like(params);
        for (Eigen::Index i = 0; i < omega.size(); ++i) omega.values()(i) = rng.uniform();
        const double lambda = 2.0 * rng.uniform();

        const auto objective = [&](const Eigen::VectorXd& x) {
            const nn::ParameterSet p(params.layout_ptr(), x);
            return nn::loss_and_grad(spec, p, batch, task, beta, g).loss +
                   cl::quadratic_penalty(p, anchor, omega, lambda).value;
        };
        const Eigen::VectorXd analytic = nn::loss_and_grad(spec, params, batch, task, beta, g).grad.values() +
                                         cl::quadratic_penalty(params, anchor, omega, lambda).grad.values();
        const Eigen::VectorXd numeric = testing::fd_gradient(objective, params.values());
        for (Eigen::Index i = 0; i < analytic.size(); ++i) {
            worst = std::max(worst, testing::rel_err(analytic(i), numeric(i)));
        }
    }
    return {worst < 1e-4, "max relative error " + fmt("%.2e", worst) + " over 50 configurations"};
}

// ---------------------------------------------------------------- 2

// A point strictly inside the ball: random, pulled toward the center if needed.
info::Categorical inside_point(std::size_t m, double eps, Rng& rng) {
    info::Categorical q = info::sample_simplex(m, rng);
    const info::Categorical u = info::Categorical::uniform(m);
    if (info::kl_divergence(q, u) > eps) {
        q = info::project_to_kl_ball(q, info::KlBall(m, eps * rng.uniform())).point;
    }
    return q;
}

// A point outside the ball: sharpen a random draw until it leaves.
info::Categorical outside_point(std::size_t m, double eps, Rng& rng) {
    const info::Categorical u = info::Categorical::uniform(m);
    Eigen::VectorXd p = info::sample_simplex(m, rng).probs();
    while (info::kl_divergence(p, u.probs()) <= eps) {
        p = p.array().square();
        p /= p.sum();
    }
    return info::Categorical(p);
}

Outcome pythagorean_suite() {
    Rng rng(0x6c656d6d61ULL);
    double min_slack = std::numeric_limits<double>::infinity();
    double worst_feasibility = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t m = 3 + rng.below(8);
        double eps = 0.0;
        while (eps <= 0.0) eps = rng.uniform() * std::log(static_cast<double>(m));
        const info::KlBall ball(m, eps);
        const info::Categorical q = inside_point(m, eps, rng);
        const info::Categorical p = outside_point(m, eps, rng);
        if (!ball.contains(q)) {
            return {false, "generated Q outside the ball"};
        }
        min_slack = std::min(min_slack, info::check_pythagorean(q, p, ball));
        const info::BallProjection star = info::project_to_kl_ball(p, ball);
        worst_feasibility = std::max(worst_feasibility, std::abs(info::kl_divergence(star.point, ball.center()) - eps));
    }
    return {min_slack >= -1e-9 && worst_feasibility <= 1e-8,
            "min slack " + fmt("%.3e", min_slack) + ", max |D(Q*||U) - eps| " + fmt("%.3e", worst_feasibility) +
                " over 10000 triples"};
}

// ---------------------------------------------------------------- 3

Outcome projection_oracle() {
    Rng rng(0x67726964ULL);
    const int n = 200;
    std::vector<Eigen::Vector3d> grid;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) grid.emplace_back(double(i) / n, double(j) / n, double(n - i - j) / n);

    const Eigen::VectorXd u = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    double worst = -std::numeric_limits<double>::infinity();  // max of D(Q*||P) - D(grid||P)
    for (int trial = 0; trial < 100; ++trial) {
        const info::Categorical p = info::sample_simplex(3, rng);
        double eps = 0.0;
        while (eps <= 0.0) eps = rng.uniform() * std::log(3.0);
        const info::BallProjection star = info::project_to_kl_ball(p, info::KlBall(3, eps));
        const double achieved = info::kl_divergence(star.point, p);
        for (const Eigen::Vector3d& q : grid) {
            if (testing::kl_direct(q, u) <= eps) {
                worst = std::max(worst, achieved - testing::kl_direct(q, p.probs()));
            }
        }
    }
    return {worst <= 1e-6, "worst excess over feasible grid points " + fmt("%.3e", worst) + " across 100 (P, eps)"};
}

// ---------------------------------------------------------------- 4

Eigen::MatrixXd random_rows(Eigen::Index n, std::size_t m, double sharpen, Rng& rng) {
    Eigen::MatrixXd rows(n, static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd r = info::sample_simplex(m, rng).probs().array().pow(sharpen);
        rows.row(i) = (r / r.sum()).transpose();
    }
    return rows;
}

Outcome prop1_suite() {
    Rng rng(0x70726f70ULL);
    double worst = std::numeric_limits<double>::infinity();  // min of raw - projected
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t m = 2 + rng.below(9);
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(6));
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = 0.1 + rng.uniform();
        w /= w.sum();
        double eps = 0.0;
        while (eps <= 0.0) eps = rng.uniform() * std::log(static_cast<double>(m));

        info::ConditionalClassifier prev(random_rows(n, m, 1.0, rng), w);
        if (info::expected_kl_to_uniform(prev) > eps) {
            prev = info::project_classifier(prev, eps * rng.uniform()).classifier;
        }
        const info::ConditionalClassifier cur(random_rows(n, m, 1.0 + 3.0 * rng.uniform(), rng), w);
        const info::CrossEntropyPair ce = info::check_prop1(prev, cur, eps);
        worst = std::min(worst, ce.raw - ce.projected);
    }
    return {worst >= -1e-9, "min ce_raw - ce_projected " + fmt("%.3e", worst) + " over 10000 triples"};
}

// ---------------------------------------------------------------- 5

Outcome metrics_oracle() {
    harness::AccuracyMatrix ex(2);
    ex.set(0, 0, 0.9);
    ex.set(1, 0, 0.8);
    ex.set(1, 1, 0.85);
    const harness::MetricsReport r = harness::compute_metrics(ex, {0.9, 0.9});
    const bool example = std::abs(r.average_accuracy[1] - 0.825) <= 1e-12 && r.forgetting[1] &&
                         std::abs(*r.forgetting[1] - 0.1) <= 1e-12 && r.intransigence(1, 2) &&
                         std::abs(*r.intransigence(1, 2) - 0.025) <= 1e-12;

    Rng rng(0x6d657472ULL);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t t = 1 + rng.below(10);
        harness::AccuracyMatrix a(t);
        std::vector<std::vector<double>> dense(t, std::vector<double>(t, 0.0));
        for (std::size_t k = 0; k < t; ++k)
            for (std::size_t j = 0; j <= k; ++j) {
                dense[k][j] = rng.uniform();
                a.set(k, j, dense[k][j]);
            }
        std::vector<double> base(t);
        for (double& b : base) b = rng.uniform();
        const harness::MetricsReport got = harness::compute_metrics(a, base);
        const testing::BruteMetrics ref = testing::brute_metrics(dense, base);
        for (std::size_t k = 1; k <= t; ++k) {
            worst = std::max(worst, std::abs(got.average_accuracy[k - 1] - ref.a[k - 1]));
            if (k >= 2) worst = std::max(worst, std::abs(*got.forgetting[k - 1] - ref.f[k - 2]));
            for (std::size_t s = 1; s <= k; ++s) {
                worst = std::max(worst, std::abs(*got.intransigence(s, k) - ref.i_range[s - 1][k - 1]));
            }
        }
    }
    return {example && worst <= 1e-12, std::string("worked example ") + (example ? "ok" : "WRONG") +
                                           ", max deviation from brute force " + fmt("%.2e", worst) +
                                           " over 1000 matrices"};
}

// ---------------------------------------------------------------- 6

Outcome reduction_identity() {
    harness::ExperimentConfig c = harness::ExperimentConfig::desk_defaults();
    c.method = harness::Method::none;
    c.lambda = 0.0;
    c.beta = 0.0;
    c.hidden_dims = {64, 64};
    c.generator.kind = harness::GeneratorKind::blobs;
    c.generator.num_tasks = 3;
    c.generator.classes_per_task = 4;
    c.generator.input_dim = 20;
    c.generator.train_per_class = 200;
    c.seed = 2024;
    const harness::TaskSequence tasks = harness::make_tasks_for(c);
    const harness::RunResult run = harness::run_continual(c, tasks);
    const harness::RunResult tuned = harness::run_continual(harness::finetune_config(c), tasks);
    const std::vector<double> base = harness::finetune_baseline(c, tasks);
    const bool params_equal = run.final_params.values() == tuned.final_params.values();
    const bool matrix_equal = run.accuracy == tuned.accuracy && base == run.accuracy.diagonal();
    return {params_equal && matrix_equal, std::string("parameters ") + (params_equal ? "identical" : "DIFFER") +
                                              ", accuracy matrix " + (matrix_equal ? "identical" : "DIFFERS")};
}

// ---------------------------------------------------------------- 7

Outcome hessian_machinery() {
    double worst = 0.0;
    Rng rng(0x68657373ULL);
    for (int trial = 0; trial < 5; ++trial) {
        nn::MlpSpec spec;
        spec.input_dim = 3;
        spec.hidden_dims = {4};
        spec.head_dims = {3};  // 31 parameters
        const nn::ParameterSet p = nn::init_params(spec, rng.next_u64());
        const nn::Batch b = testing::random_batch(10, 3, 3, rng);
        const nn::LossContext ctx = nn::LossContext::network(spec, b, 0, 0.5, info::Categorical::uniform(3));
        const nn::HessianEigenpairs e = nn::top2_hessian_eigs(ctx, p.values(), 5000, 1e-12, rng.next_u64());
        const auto dense = testing::eigenvalues_by_magnitude(
            testing::fd_hessian([&](const Eigen::VectorXd& x) { return ctx.gradient(x); }, p.values()));
        worst = std::max({worst, testing::rel_err(e.lambda1, dense[0]), testing::rel_err(e.lambda2, dense[1])});
    }
    return {worst <= 1e-3, "max relative eigenvalue error " + fmt("%.2e", worst) + " on 5 nets of 31 parameters"};
}

// ---------------------------------------------------------------- 10

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool header_is(const std::string& text, std::string_view header) {
    return text.compare(0, header.size() + 1, std::string(header) + "\n") == 0;
}

Outcome io_fidelity() {
    std::vector<std::string> problems;
    const fs::path dir = fs::temp_directory_path() / "cplab_acceptance_io";
    fs::remove_all(dir);

    harness::ExperimentConfig c;
    c.hidden_dims = {8};
    c.epochs = 1;
    c.generator.num_tasks = 3;
    c.generator.input_dim = 4;
    c.generator.train_per_class = 30;
    c.method = harness::Method::ewc;
    c.lambda = 5.0;
    c.beta = 0.5;
    c.seed = 77;
    const harness::TaskSequence tasks = harness::make_tasks_for(c);
    const harness::RunResult run = harness::run_continual(c, tasks);
    harness::RunArtifacts art{c, run.accuracy, harness::finetune_baseline(c, tasks), run.spec, run.final_params};
    harness::persist_results(art, dir);
    const harness::RunArtifacts back = harness::load_results(dir);
    if (!(back.accuracy == art.accuracy)) problems.push_back("accuracy matrix changed on reload");
    if (back.baseline != art.baseline) problems.push_back("baseline changed on reload");
    if (!back.params || back.params->values() != art.params->values()) problems.push_back("parameters changed on reload");

    // IDX magic corruption in either file.
    const Eigen::MatrixXd img = Eigen::MatrixXd::Constant(2, 4, 0.5);
    auto images = harness::encode_idx_images(img, 2, 2);
    auto labels = harness::encode_idx_labels({0, 1});
    auto bad_images = images;
    bad_images[3] ^= 0x02;
    auto bad_labels = labels;
    bad_labels[2] = 0x01;
    for (const auto& [i, l] : {std::pair{bad_images, labels}, std::pair{images, bad_labels}}) {
        try {
            harness::parse_idx(i, l);
            problems.push_back("corrupted IDX magic accepted");
        } catch (const harness::IdxFormatError&) {
        }
    }

    // Declared headers, byte for byte.
    if (!header_is(slurp(dir / "accuracy.csv"), "k,j,accuracy")) problems.push_back("accuracy.csv header");
    if (!header_is(slurp(dir / "metrics.csv"), "metric,k_or_range,value")) problems.push_back("metrics.csv header");
    harness::ExperimentConfig sc = c;
    sc.generator.num_tasks = 2;
    if (!header_is(harness::sweep_csv(harness::sweep_beta(sc, {0.0}, 1)), "beta,A_mean,A_std,F_mean,F_std,I_mean,I_std"))
        problems.push_back("sweep.csv header");
    const probes::NoiseProbeReport noise =
        probes::noise_probe(run.spec, run.final_params, tasks, probes::Split::test, {0.0, 0.01}, 2, 1);
    if (!header_is(probes::noise_csv(noise), "task,sigma,trial,loss,loss_increase")) problems.push_back("noise.csv header");
    if (!header_is(probes::noise_summary_csv(noise), "task,sigma,mean,std")) problems.push_back("noise_summary.csv header");
    const probes::LandscapeGrid grid =
        probes::landscape_probe(run.spec, run.final_params, tasks.tasks[0].train, 0, 0.1, 3, 20, 1e-6);
    if (!header_is(probes::landscape_csv(grid), "alpha,gamma,loss")) problems.push_back("landscape csv header");
    fs::remove_all(dir);

    std::string detail = problems.empty() ? "round trip exact, corrupted magic rejected, 6 headers exact" : "";
    for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
    return {problems.empty(), detail};
}

// ---------------------------------------------------------------- 8, 9

struct Reproduction {
    harness::ExperimentConfig base;
    std::vector<double> lambda_grid;
    std::uint64_t selection_seed = 0;
    std::vector<std::uint64_t> seeds;
    double beta = 0.5;
};

// 10-task fallback sequence with the desk architecture; see README for the choice of blobs.
Reproduction reproduction_setup(std::size_t seeds) {
    Reproduction r;
    harness::ExperimentConfig& c = r.base;
    c = harness::ExperimentConfig::desk_defaults();
    c.method = harness::Method::ewc;
    c.wlm = harness::WlmMode::cpr;
    c.generator.kind = harness::GeneratorKind::blobs;
    c.generator.num_tasks = 10;
    c.generator.classes_per_task = 10;
    c.generator.input_dim = 784;
    c.generator.separation = 3.0;
    c.generator.train_per_class = 1500;
    c.generator.test_per_class = 100;
    r.lambda_grid = {1.0, 10.0, 100.0};
    r.selection_seed = 9000;
    for (std::size_t s = 0; s < seeds; ++s) r.seeds.push_back(1 + s);
    return r;
}

struct ArmResult {
    double a_final = 0.0;
    double intransigence = 0.0;
    double noise_increase = 0.0;
};

void reproduction(std::size_t seed_count) {
    const Reproduction setup = reproduction_setup(seed_count);
    std::vector<ArmResult> ewc, cpr;
    double chosen_lambda = 0.0;

    criterion(8, "directional reproduction (EWC vs EWC+CPR, 10-task blobs, 784-256-256)", 1200.0, [&]() -> Outcome {
        // Pick lambda for EWC alone, then add CPR at that lambda.
        double best = -1.0;
        std::string grid_note;
        for (double lambda : setup.lambda_grid) {
            harness::ExperimentConfig c = setup.base;
            c.lambda = lambda;
            c.beta = 0.0;
            c.seed = setup.selection_seed;
            const harness::RunResult run = harness::run_continual(c, harness::make_tasks_for(c));
            const double a = harness::compute_metrics(run.accuracy, {}).average_accuracy.back();
            grid_note += (grid_note.empty() ? "" : " ") + fmt("%g", lambda) + ":" + fmt("%.4f", a);
            if (a > best) {
                best = a;
                chosen_lambda = lambda;
            }
        }
        for (std::uint64_t seed : setup.seeds) {
            harness::ExperimentConfig c = setup.base;
            c.lambda = chosen_lambda;
            c.seed = seed;
            const harness::TaskSequence tasks = harness::make_tasks_for(c);
            const std::vector<double> baseline = harness::finetune_baseline(c, tasks);
            for (double beta : {0.0, setup.beta}) {
                c.beta = beta;
                const harness::RunResult run = harness::run_continual(c, tasks);
                const harness::MetricsReport m = harness::compute_metrics(run.accuracy, baseline);
                const probes::NoiseProbeReport noise =
                    probes::noise_probe(run.spec, run.final_params, tasks, probes::Split::test, probes::kDefaultSigmas,
                                        probes::kDefaultTrials, derive_seed(seed, {0x6e6f697365ULL}));
                ArmResult arm{m.average_accuracy.back(), *m.intransigence(1, 10), noise.mean_increase_at(0.05)};
                (beta == 0.0 ? ewc : cpr).push_back(arm);
                std::printf("  seed %llu beta %.1f: A_10 %.4f I_1,10 %.4f noise@0.05 %.4f\n",
                            static_cast<unsigned long long>(seed), beta, arm.a_final, arm.intransigence,
                            arm.noise_increase);
                std::fflush(stdout);
            }
        }
        const auto mean = [](const std::vector<ArmResult>& v, double ArmResult::*f) {
            double s = 0.0;
            for (const auto& r : v) s += r.*f;
            return s / static_cast<double>(v.size());
        };
        const double a0 = mean(ewc, &ArmResult::a_final), a1 = mean(cpr, &ArmResult::a_final);
        const double i0 = mean(ewc, &ArmResult::intransigence), i1 = mean(cpr, &ArmResult::intransigence);
        return {a1 > a0 && i1 < i0, "lambda grid {" + grid_note + "} chose " + fmt("%g", chosen_lambda) +
                                        "; mean A_10 " + fmt("%.4f", a0) + " -> " + fmt("%.4f", a1) +
                                        ", mean I_1,10 " + fmt("%.4f", i0) + " -> " + fmt("%.4f", i1) + " over " +
                                        std::to_string(setup.seeds.size()) + " seeds"};
    });

    criterion(9, "flatness direction (noise probe at sigma 0.05)", 0.0, [&]() -> Outcome {
        if (ewc.size() != setup.seeds.size() || cpr.size() != setup.seeds.size()) {
            return {false, "criterion 8 models unavailable"};
        }
        std::size_t wins = 0;
        for (std::size_t s = 0; s < ewc.size(); ++s) wins += cpr[s].noise_increase < ewc[s].noise_increase;
        const std::size_t need = (4 * ewc.size() + 4) / 5;
        return {wins >= need, "CPR lower in " + std::to_string(wins) + " of " + std::to_string(ewc.size()) +
                                  " seeds (need " + std::to_string(need) + ")"};
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    bool skip = false, only = false;
    std::size_t seeds = 5;
    app.add_flag("--skip-reproduction", skip, "skip criteria 8 and 9");
    app.add_flag("--only-reproduction", only, "run only criteria 8 and 9");
    app.add_option("--seeds", seeds, "seeds for criteria 8 and 9")->check(CLI::Range(5, 100));
    CLI11_PARSE(app, argc, argv);
    if (skip && only) {
        std::fprintf(stderr, "--skip-reproduction and --only-reproduction are exclusive\n");
        return 2;
    }

    if (!only) {
        criterion(1, "gradient exactness", 10.0, gradient_exactness);
        criterion(2, "Pythagorean property suite", 5.0, pythagorean_suite);
        criterion(3, "projection optimality oracle", 30.0, projection_oracle);
        criterion(4, "cross-entropy projection inequality", 5.0, prop1_suite);
        criterion(5, "metrics oracle", 0.0, metrics_oracle);
        criterion(6, "reduction identity", 0.0, reduction_identity);
        criterion(7, "Hessian machinery", 10.0, hessian_machinery);
        criterion(10, "I/O fidelity", 0.0, io_fidelity);
    }
    if (!skip) {
        reproduction(seeds);
    }
    return failures == 0 ? 0 : 1;
}
