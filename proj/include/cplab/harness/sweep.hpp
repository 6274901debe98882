#pragma once

#include "cplab/harness/config.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace cplab::harness {

struct SweepRow {
    double beta = 0.0;
    double a_mean = 0.0, a_std = 0.0;
    double f_mean = 0.0, f_std = 0.0;
    double i_mean = 0.0, i_std = 0.0;
};

/// Seed of repeat r under `master`. Independent of beta, so every beta sees
/// the same task draws and initializations (paired comparison).
std::uint64_t repeat_seed(std::uint64_t master, std::size_t repeat);

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(const std::vector<double>& values);

/// For each beta (in the given order) runs `repeats` continual runs and reports
/// mean/std of A_T, F_T and I_{1,T}. Tasks are regenerated per repeat from the
/// repeat seed; the fine-tuning baseline is computed once per repeat. F_T is
/// taken as 0 when T = 1.
std::vector<SweepRow> sweep_beta(const ExperimentConfig& config, const std::vector<double>& betas,
                                 std::size_t repeats);

}  // namespace cplab::harness
