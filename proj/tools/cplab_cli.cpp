// Command-line front end: training runs, baselines, metrics, beta sweeps,
// wide-minima probes and the KL-ball projection.

#include "cplab/harness/config.hpp"
#include "cplab/harness/metrics.hpp"
#include "cplab/harness/persist.hpp"
#include "cplab/harness/sweep.hpp"
#include "cplab/harness/trainer.hpp"
#include "cplab/info/projection.hpp"
#include "cplab/probes/landscape.hpp"
#include "cplab/probes/noise.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace cplab;
using namespace cplab::harness;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string method;
    std::optional<double> lambda;
    std::optional<double> beta;
    std::string wlm;
    bool published_defaults = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--method", f.method, "none | ewc | si | mas | rwalk");
    cmd->add_option("--lambda", f.lambda, "quadratic penalty strength");
    cmd->add_option("--beta", f.beta, "output regularizer strength");
    cmd->add_option("--wlm", f.wlm, "output regularizer: cpr | ls | off")
        ->check(CLI::IsMember({"cpr", "ls", "off"}));
    cmd->add_flag("--published-defaults", f.published_defaults,
                  "start from the published lambda/beta of the chosen method");
}

// Precedence: desk defaults < published profile < config file < flags.
ExperimentConfig resolve(const CommonFlags& f) {
    ExperimentConfig c = ExperimentConfig::desk_defaults();
    if (f.published_defaults) {
        if (f.method.empty()) {
            throw ConfigError("--published-defaults needs --method");
        }
        const ExperimentConfig p = ExperimentConfig::published_defaults(parse_method(f.method));
        c.method = p.method;
        c.lambda = p.lambda;
        c.beta = p.beta;
    }
    if (!f.config_path.empty()) {
        c = load_config(f.config_path, c);
    }
    if (!f.method.empty()) c.method = parse_method(f.method);
    if (f.lambda) c.lambda = *f.lambda;
    if (f.beta) c.beta = *f.beta;
    if (!f.wlm.empty()) c.wlm = parse_wlm(f.wlm);
    if (f.seed) c.seed = *f.seed;
    if (!f.out.empty()) c.output_dir = f.out;
    c.validate();
    attach_idx_source(c);
    return c;
}

void print_metrics(const MetricsReport& m) {
    const std::size_t t = m.average_accuracy.size();
    std::printf("A_%zu = %.6f\n", t, m.average_accuracy.back());
    if (t >= 2 && m.forgetting.back()) {
        std::printf("F_%zu = %.6f\n", t, *m.forgetting.back());
    }
    if (auto i = m.intransigence(1, t)) {
        std::printf("I_1,%zu = %.6f\n", t, *i);
    }
}

std::vector<double> parse_reals(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (item.find_first_not_of(" \t", used) != std::string::npos) {
            throw std::invalid_argument("not a number: '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw std::invalid_argument("empty list");
    }
    return out;
}

// Rebuilds the task sequence a saved run was trained on.
struct LoadedRun {
    RunArtifacts artifacts;
    TaskSequence tasks;
};

LoadedRun load_run(const std::string& dir) {
    LoadedRun r{load_results(dir), {}};
    if (!r.artifacts.spec || !r.artifacts.params) {
        throw PersistError("run directory has no saved parameters: " + dir);
    }
    attach_idx_source(r.artifacts.config);
    r.tasks = make_tasks_for(r.artifacts.config);
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continual-learning lab: classifier-projection regularization on multi-head MLPs"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    bool skip_baseline = false;
    auto* train = app.add_subcommand("train", "one continual run; writes accuracy, metrics, manifest, params");
    add_common(train, train_flags);
    train->add_flag("--skip-baseline", skip_baseline, "do not train the fine-tuning baseline (no intransigence)");

    CommonFlags base_flags;
    auto* baseline = app.add_subcommand("baseline", "fine-tuning accuracies a*_j");
    add_common(baseline, base_flags);

    std::string metrics_run;
    auto* metrics = app.add_subcommand("metrics", "recompute A/F/I from a saved run");
    metrics->add_option("--run", metrics_run, "run directory")->required();

    CommonFlags sweep_flags;
    std::string betas_text = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
    std::size_t repeats = 3;
    auto* sweep = app.add_subcommand("sweep-beta", "A/F/I versus beta over repeated runs");
    add_common(sweep, sweep_flags);
    sweep->add_option("--betas", betas_text, "comma-separated beta values");
    sweep->add_option("--repeats", repeats, "runs per beta")->check(CLI::PositiveNumber);

    std::string noise_run, noise_out, split_name = "test", sigmas_text = "0,0.01,0.02,0.03,0.04,0.05";
    std::size_t trials = probes::kDefaultTrials;
    std::uint64_t noise_seed = 0;
    auto* noise = app.add_subcommand("probe-noise", "loss increase under Gaussian parameter noise");
    noise->add_option("--run", noise_run, "run directory")->required();
    noise->add_option("--out", noise_out, "output directory (default: the run directory)");
    noise->add_option("--split", split_name, "train | test")->check(CLI::IsMember({"train", "test"}));
    noise->add_option("--sigmas", sigmas_text, "comma-separated, strictly increasing");
    noise->add_option("--trials", trials)->check(CLI::PositiveNumber);
    noise->add_option("--seed", noise_seed, "perturbation seed");

    std::string land_run, land_out;
    std::size_t land_task = 0, resolution = probes::kDefaultLandscapeResolution;
    double radius = probes::kDefaultLandscapeRadius, tol = probes::kDefaultPowerTol;
    int iters = probes::kDefaultPowerIters;
    std::uint64_t land_seed = 0;
    auto* land = app.add_subcommand("probe-landscape", "loss along the top two Hessian eigenvectors");
    land->add_option("--run", land_run, "run directory")->required();
    land->add_option("--out", land_out, "output directory (default: the run directory)");
    land->add_option("--task", land_task, "1-based task; 0 probes every task");
    land->add_option("--radius", radius)->check(CLI::NonNegativeNumber);
    land->add_option("--resolution", resolution, "odd grid size >= 3");
    land->add_option("--iters", iters, "power iterations")->check(CLI::PositiveNumber);
    land->add_option("--tol", tol, "relative eigenvalue tolerance");
    land->add_option("--seed", land_seed, "power-iteration start seed");

    std::string dist_text;
    double epsilon = 0.0;
    auto* project = app.add_subcommand("project", "I-projection onto the KL ball around uniform");
    project->add_option("distribution", dist_text, "comma-separated probabilities")->required();
    project->add_option("--epsilon", epsilon, "ball radius")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            const ExperimentConfig c = resolve(train_flags);
            const TaskSequence tasks = make_tasks_for(c);
            const RunResult run = run_continual(c, tasks);
            RunArtifacts art{c, run.accuracy, {}, run.spec, run.final_params};
            if (!skip_baseline) {
                art.baseline = finetune_baseline(c, tasks);
            }
            persist_results(art, c.output_dir);
            print_metrics(compute_metrics(art.accuracy, art.baseline));
            std::printf("wrote %s\n", c.output_dir.c_str());
        } else if (*baseline) {
            const ExperimentConfig c = resolve(base_flags);
            const std::vector<double> base = finetune_baseline(c, make_tasks_for(c));
            std::string csv = "task,accuracy\n";
            for (std::size_t j = 0; j < base.size(); ++j) {
                csv += std::to_string(j + 1) + ',' + format_fixed6(base[j]) + '\n';
            }
            fs::create_directories(c.output_dir);
            write_atomic(fs::path(c.output_dir) / "baseline.csv", csv);
            std::fputs(csv.c_str(), stdout);
        } else if (*metrics) {
            const RunArtifacts art = load_results(metrics_run);
            std::fputs(metrics_csv(compute_metrics(art.accuracy, art.baseline)).c_str(), stdout);
        } else if (*sweep) {
            const ExperimentConfig c = resolve(sweep_flags);
            const std::string csv = sweep_csv(sweep_beta(c, parse_reals(betas_text), repeats));
            fs::create_directories(c.output_dir);
            write_atomic(fs::path(c.output_dir) / "sweep.csv", csv);
            std::fputs(csv.c_str(), stdout);
        } else if (*noise) {
            const LoadedRun r = load_run(noise_run);
            const probes::Split split = split_name == "train" ? probes::Split::train : probes::Split::test;
            const probes::NoiseProbeReport rep =
                probes::noise_probe(*r.artifacts.spec, *r.artifacts.params, r.tasks, split,
                                    parse_reals(sigmas_text), trials, noise_seed);
            const fs::path out = noise_out.empty() ? fs::path(noise_run) : fs::path(noise_out);
            fs::create_directories(out);
            write_atomic(out / "noise.csv", probes::noise_csv(rep));
            write_atomic(out / "noise_summary.csv", probes::noise_summary_csv(rep));
            std::fputs(probes::noise_summary_csv(rep).c_str(), stdout);
        } else if (*land) {
            const LoadedRun r = load_run(land_run);
            if (land_task > r.tasks.size()) {
                throw std::out_of_range("--task beyond the run's task count");
            }
            const fs::path out = land_out.empty() ? fs::path(land_run) : fs::path(land_out);
            fs::create_directories(out);
            const std::size_t first = land_task == 0 ? 1 : land_task;
            const std::size_t last = land_task == 0 ? r.tasks.size() : land_task;
            for (std::size_t j = first; j <= last; ++j) {
                const probes::LandscapeGrid g = probes::landscape_probe(
                    *r.artifacts.spec, *r.artifacts.params, r.tasks.tasks[j - 1].train, j - 1, radius,
                    resolution, iters, tol, land_seed);
                const std::string stem = "landscape_task" + std::to_string(j);
                write_atomic(out / (stem + ".csv"), probes::landscape_csv(g));
                write_atomic(out / (stem + "_eigen.csv"), probes::landscape_eigen_csv(g));
                std::printf("task %zu: lambda1 = %.6f lambda2 = %.6f\n", j, g.eigen.lambda1, g.eigen.lambda2);
                if (!g.converged) {
                    std::fprintf(stderr, "warning: task %zu: %s\n", j, g.warning.c_str());
                }
            }
        } else if (*project) {
            const std::vector<double> raw = parse_reals(dist_text);
            const info::Categorical p(Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<Eigen::Index>(raw.size())));
            const info::KlBall ball(p.size(), epsilon);
            const info::BallProjection q = info::project_to_kl_ball(p, ball);
            std::printf("q =");
            for (std::size_t i = 0; i < q.point.size(); ++i) {
                std::printf("%s%.12f", i == 0 ? " " : ",", q.point[i]);
            }
            std::printf("\nmultiplier = %.12f\n", q.multiplier);
            std::printf("radius = %.12f\n", info::kl_divergence(q.point, ball.center()));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
