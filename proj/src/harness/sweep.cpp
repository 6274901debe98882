#include "cplab/harness/sweep.hpp"

#include "cplab/harness/trainer.hpp"
#include "cplab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cplab::harness {

std::uint64_t repeat_seed(std::uint64_t master, std::size_t repeat) {
    return derive_seed(master, {0x7377656570ULL, repeat});
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.empty()) {
        return {0.0, 0.0};
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() == 1) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::vector<SweepRow> sweep_beta(const ExperimentConfig& config, const std::vector<double>& betas,
                                 std::size_t repeats) {
    if (betas.empty()) {
        throw std::invalid_argument("sweep_beta: no beta values");
    }
    if (repeats < 1) {
        throw std::invalid_argument("sweep_beta: repeats must be at least 1");
    }
    std::vector<std::vector<double>> a(betas.size()), f(betas.size()), i(betas.size());
    for (std::size_t r = 0; r < repeats; ++r) {
        ExperimentConfig base = config;
        base.seed = repeat_seed(config.seed, r);
        const TaskSequence tasks = make_tasks_for(base);
        const std::vector<double> baseline = finetune_baseline(base, tasks);
        for (std::size_t b = 0; b < betas.size(); ++b) {
            ExperimentConfig run = base;
            run.beta = betas[b];
            const MetricsReport m = compute_metrics(run_continual(run, tasks).accuracy, baseline);
            const std::size_t t = tasks.size();
            a[b].push_back(m.average_accuracy.back());
            f[b].push_back(m.forgetting.back().value_or(0.0));
            i[b].push_back(*m.intransigence(1, t));
        }
    }
    std::vector<SweepRow> rows;
    rows.reserve(betas.size());
    for (std::size_t b = 0; b < betas.size(); ++b) {
        SweepRow row;
        row.beta = betas[b];
        std::tie(row.a_mean, row.a_std) = mean_std(a[b]);
        std::tie(row.f_mean, row.f_std) = mean_std(f[b]);
        std::tie(row.i_mean, row.i_std) = mean_std(i[b]);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace cplab::harness
