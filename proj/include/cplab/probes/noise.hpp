#pragma once

#include "cplab/harness/tasks.hpp"
#include "cplab/nn/mlp.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cplab::probes {

enum class Split { train, test };

struct NoiseSample {
    std::size_t task = 0;
    double sigma = 0.0;
    std::size_t trial = 0;
    double loss = 0.0;
    double loss_increase = 0.0;
};

struct NoiseSummary {
    std::size_t task = 0;
    double sigma = 0.0;
    double mean = 0.0;  ///< mean loss_increase over trials
    double std = 0.0;   ///< sample standard deviation over trials
};

struct NoiseProbeReport {
    std::vector<NoiseSample> samples;
    std::vector<NoiseSummary> summary;

    /// Mean loss increase at `sigma`, averaged over tasks.
    [[nodiscard]] double mean_increase_at(double sigma) const;
};

using ParameterLoss = std::function<double(const nn::ParameterSet&)>;

/// Robustness curve of one loss: for each sigma and trial, perturb the
/// parameters with seed derive_seed(seed, {task, sigma index, trial}) and
/// record the loss and its increase over the unperturbed loss.
/// Sigmas must be strictly increasing and nonnegative; trials >= 1.
NoiseProbeReport perturbation_curve(const ParameterLoss& loss, const nn::ParameterSet& params,
                                    const std::vector<double>& sigmas, std::size_t trials,
                                    std::uint64_t seed, std::size_t task = 0);

/// perturbation_curve of every task's mean CE (head j on split j of task j).
NoiseProbeReport noise_probe(const nn::MlpSpec& spec, const nn::ParameterSet& params,
                             const harness::TaskSequence& tasks, Split split,
                             const std::vector<double>& sigmas, std::size_t trials,
                             std::uint64_t seed);

inline const std::vector<double> kDefaultSigmas{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
inline constexpr std::size_t kDefaultTrials = 20;

std::string noise_csv(const NoiseProbeReport& report);
std::string noise_summary_csv(const NoiseProbeReport& report);

}  // namespace cplab::probes
