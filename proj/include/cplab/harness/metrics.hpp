#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace cplab::harness {

/// Lower-triangular a[k][j]: accuracy on task j after training task k (j <= k).
/// Indices are 0-based here; files and reports use 1-based task numbers.
class AccuracyMatrix {
public:
    explicit AccuracyMatrix(std::size_t tasks);

    [[nodiscard]] std::size_t tasks() const noexcept { return n_; }
    /// Throws std::out_of_range for j > k or k >= tasks, std::domain_error outside [0, 1].
    void set(std::size_t k, std::size_t j, double accuracy);
    [[nodiscard]] double at(std::size_t k, std::size_t j) const;
    [[nodiscard]] bool populated(std::size_t k, std::size_t j) const;
    /// True when every entry with j <= k is populated.
    [[nodiscard]] bool complete() const;
    /// a[j][j] for every j.
    [[nodiscard]] std::vector<double> diagonal() const;

    friend bool operator==(const AccuracyMatrix&, const AccuracyMatrix&) = default;

private:
    [[nodiscard]] std::size_t index(std::size_t k, std::size_t j) const;

    std::size_t n_;
    std::vector<double> values_;
    std::vector<bool> set_;
};

struct MetricsReport {
    /// A_k for k = 1..T (index k-1).
    std::vector<double> average_accuracy;
    /// F_k for k = 1..T; F_1 is absent.
    std::vector<std::optional<double>> forgetting;
    /// f_k^j at [k-1][j-1] for j < k.
    std::vector<std::vector<double>> task_forgetting;
    /// i_j = a*_j - a_{j,j} for every j covered by the baseline.
    std::vector<double> intransigence_terms;
    std::vector<double> baseline;

    /// I_{s,k} = mean of i_j over j = s..k (1-based, inclusive). Absent for an
    /// empty range or when the baseline does not reach k.
    [[nodiscard]] std::optional<double> intransigence(std::size_t s, std::size_t k) const;
};

/// Evaluates the average accuracy, forgetting and intransigence definitions on a
/// complete matrix. `baseline` may be shorter than T (or empty); intransigence is
/// then only available up to its length. Throws std::invalid_argument if the
/// matrix is incomplete or the baseline is longer than T.
MetricsReport compute_metrics(const AccuracyMatrix& acc, const std::vector<double>& baseline);

}  // namespace cplab::harness
