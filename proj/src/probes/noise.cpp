#include "cplab/probes/noise.hpp"

#include "cplab/harness/persist.hpp"
#include "cplab/harness/sweep.hpp"
#include "cplab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cplab::probes {

double NoiseProbeReport::mean_increase_at(double sigma) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : summary) {
        if (s.sigma == sigma) {
            sum += s.mean;
            ++n;
        }
    }
    if (n == 0) {
        throw std::invalid_argument("noise report has no rows at the requested sigma");
    }
    return sum / static_cast<double>(n);
}

NoiseProbeReport perturbation_curve(const ParameterLoss& loss, const nn::ParameterSet& params,
                                    const std::vector<double>& sigmas, std::size_t trials,
                                    std::uint64_t seed, std::size_t task) {
    if (sigmas.empty() || trials < 1) {
        throw std::invalid_argument("noise probe: need at least one sigma and one trial");
    }
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (!(sigmas[i] >= 0.0) || (i > 0 && !(sigmas[i] > sigmas[i - 1]))) {
            throw std::invalid_argument("noise probe: sigmas must be nonnegative and strictly increasing");
        }
    }
    NoiseProbeReport report;
    const double clean = loss(params);
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
        std::vector<double> increases;
        increases.reserve(trials);
        for (std::size_t trial = 0; trial < trials; ++trial) {
            const nn::ParameterSet noisy =
                nn::perturb(params, sigmas[si], derive_seed(seed, {task, si, trial}));
            const double value = loss(noisy);
            report.samples.push_back({task, sigmas[si], trial, value, value - clean});
            increases.push_back(value - clean);
        }
        const auto [mean, std] = harness::mean_std(increases);
        report.summary.push_back({task, sigmas[si], mean, std});
    }
    return report;
}

NoiseProbeReport noise_probe(const nn::MlpSpec& spec, const nn::ParameterSet& params,
                             const harness::TaskSequence& tasks, Split split,
                             const std::vector<double>& sigmas, std::size_t trials,
                             std::uint64_t seed) {
    if (tasks.size() > spec.num_heads()) {
        throw std::invalid_argument("noise probe: more tasks than network heads");
    }
    NoiseProbeReport report;
    for (std::size_t j = 0; j < tasks.size(); ++j) {
        const nn::Batch& data = split == Split::train ? tasks.tasks[j].train : tasks.tasks[j].test;
        NoiseProbeReport part = perturbation_curve(
            [&](const nn::ParameterSet& p) { return nn::cross_entropy(spec, p, data, j); }, params,
            sigmas, trials, seed, j);
        report.samples.insert(report.samples.end(), part.samples.begin(), part.samples.end());
        report.summary.insert(report.summary.end(), part.summary.begin(), part.summary.end());
    }
    return report;
}

std::string noise_csv(const NoiseProbeReport& report) {
    std::string out = "task,sigma,trial,loss,loss_increase\n";
    for (const auto& s : report.samples) {
        out += std::to_string(s.task + 1) + ',' + harness::format_fixed6(s.sigma) + ',' +
               std::to_string(s.trial + 1) + ',' + harness::format_fixed6(s.loss) + ',' +
               harness::format_fixed6(s.loss_increase) + '\n';
    }
    return out;
}

std::string noise_summary_csv(const NoiseProbeReport& report) {
    std::string out = "task,sigma,mean,std\n";
    for (const auto& s : report.summary) {
        out += std::to_string(s.task + 1) + ',' + harness::format_fixed6(s.sigma) + ',' +
               harness::format_fixed6(s.mean) + ',' + harness::format_fixed6(s.std) + '\n';
    }
    return out;
}

}  // namespace cplab::probes
