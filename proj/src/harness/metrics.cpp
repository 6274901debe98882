#include "cplab/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cplab::harness {

AccuracyMatrix::AccuracyMatrix(std::size_t tasks)
    : n_(tasks), values_(tasks * (tasks + 1) / 2, 0.0), set_(tasks * (tasks + 1) / 2, false) {
    if (tasks == 0) {
        throw std::invalid_argument("AccuracyMatrix: at least one task is required");
    }
}

std::size_t AccuracyMatrix::index(std::size_t k, std::size_t j) const {
    if (k >= n_ || j > k) {
        throw std::out_of_range("AccuracyMatrix: entry (" + std::to_string(k) + ", " +
                                std::to_string(j) + ") outside the lower triangle");
    }
    return k * (k + 1) / 2 + j;
}

void AccuracyMatrix::set(std::size_t k, std::size_t j, double accuracy) {
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
        throw std::domain_error("AccuracyMatrix: accuracy must lie in [0, 1]");
    }
    const std::size_t i = index(k, j);
    values_[i] = accuracy;
    set_[i] = true;
}

double AccuracyMatrix::at(std::size_t k, std::size_t j) const {
    const std::size_t i = index(k, j);
    if (!set_[i]) {
        throw std::out_of_range("AccuracyMatrix: entry not populated");
    }
    return values_[i];
}

bool AccuracyMatrix::populated(std::size_t k, std::size_t j) const {
    return set_[index(k, j)];
}

bool AccuracyMatrix::complete() const {
    return std::all_of(set_.begin(), set_.end(), [](bool b) { return b; });
}

std::vector<double> AccuracyMatrix::diagonal() const {
    std::vector<double> d;
    d.reserve(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        d.push_back(at(j, j));
    }
    return d;
}

std::optional<double> MetricsReport::intransigence(std::size_t s, std::size_t k) const {
    if (s < 1 || s > k || k > intransigence_terms.size()) {
        return std::nullopt;
    }
    double sum = 0.0;
    for (std::size_t j = s; j <= k; ++j) {
        sum += intransigence_terms[j - 1];
    }
    return sum / static_cast<double>(k - s + 1);
}

MetricsReport compute_metrics(const AccuracyMatrix& acc, const std::vector<double>& baseline) {
    if (!acc.complete()) {
        throw std::invalid_argument("compute_metrics: accuracy matrix is incomplete");
    }
    const std::size_t t = acc.tasks();
    if (baseline.size() > t) {
        throw std::invalid_argument("compute_metrics: baseline longer than the task count");
    }
    MetricsReport r;
    r.baseline = baseline;
    r.average_accuracy.resize(t);
    r.forgetting.assign(t, std::nullopt);
    r.task_forgetting.resize(t);

    for (std::size_t k = 0; k < t; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j <= k; ++j) {
            sum += acc.at(k, j);
        }
        r.average_accuracy[k] = sum / static_cast<double>(k + 1);

        if (k == 0) {
            continue;
        }
        double total_forgetting = 0.0;
        r.task_forgetting[k].resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            double best = acc.at(j, j);
            for (std::size_t l = j + 1; l < k; ++l) {
                best = std::max(best, acc.at(l, j));
            }
            r.task_forgetting[k][j] = best - acc.at(k, j);
            total_forgetting += r.task_forgetting[k][j];
        }
        r.forgetting[k] = total_forgetting / static_cast<double>(k);
    }

    r.intransigence_terms.reserve(baseline.size());
    for (std::size_t j = 0; j < baseline.size(); ++j) {
        r.intransigence_terms.push_back(baseline[j] - acc.at(j, j));
    }
    return r;
}

}  // namespace cplab::harness
