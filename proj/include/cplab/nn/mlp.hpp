#pragma once

#include "cplab/info/categorical.hpp"
#include "cplab/nn/parameters.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cplab::nn {

struct Batch {
    Eigen::MatrixXd inputs;   ///< N x input_dim
    std::vector<int> labels;  ///< N labels in [0, M_t)

    [[nodiscard]] Eigen::Index size() const noexcept { return inputs.rows(); }
    /// Throws unless N >= 1, labels.size() == N and every label is in [0, num_classes).
    void validate(std::size_t num_classes) const;
    /// Rows selected by `indices`, in that order.
    [[nodiscard]] Batch subset(const std::vector<Eigen::Index>& indices) const;
};

/// Cached activations of one forward pass through the trunk and a single head.
struct ForwardPass {
    std::size_t task = 0;
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> hidden;  ///< post-activation output of each trunk layer
    Eigen::MatrixXd logits;
    Eigen::MatrixXd probs;  ///< row-wise softmax of logits

    [[nodiscard]] const Eigen::MatrixXd& trunk_output() const {
        return hidden.empty() ? input : hidden.back();
    }
};

ForwardPass forward(const MlpSpec& spec, const ParameterSet& params,
                    const Eigen::MatrixXd& inputs, std::size_t task);

/// Backpropagates dLoss/dlogits (N x M_t) through the cached pass. Parameters of
/// heads other than fp.task receive zero gradient.
GradientSet backward(const MlpSpec& spec, const ParameterSet& params, const ForwardPass& fp,
                     const Eigen::MatrixXd& dlogits);

enum class SampleReduction { squared, absolute };

/// Sum over samples n of h(g_n), h = square or abs applied entrywise, where g_n
/// is the gradient of row n of `dlogits` alone. Weight entries of a sample
/// gradient are products a_i * delta_j, so the sums reduce to matrix products
/// of h(activations) and h(deltas) without forming per-sample vectors.
GradientSet per_sample_gradient_sums(const MlpSpec& spec, const ParameterSet& params,
                                     const ForwardPass& fp, const Eigen::MatrixXd& dlogits,
                                     SampleReduction reduction);

/// N x M_t matrix of softmax rows.
Eigen::MatrixXd predict(const MlpSpec& spec, const ParameterSet& params,
                        const Eigen::MatrixXd& inputs, std::size_t task);

/// Row-wise max-subtracted softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

struct LossAndGrad {
    double loss = 0.0;
    GradientSet grad;
};

/// mean_n CE(f(x_n), target_n) + (beta / N) sum_n KL(f(x_n) || g).
///
/// The CE target is onehot(y_n) mixed with uniform by `label_smoothing`
/// (0 gives plain cross-entropy). The KL gradient is injected at the logits as
/// p*(log p - log g) - p * sum_m p_m (log p_m - log g_m).
LossAndGrad loss_and_grad(const MlpSpec& spec, const ParameterSet& params, const Batch& batch,
                          std::size_t task, double beta, const info::Categorical& g,
                          double label_smoothing = 0.0);

/// Plain mean cross-entropy of head `task`, no gradient.
double cross_entropy(const MlpSpec& spec, const ParameterSet& params, const Batch& batch,
                     std::size_t task);

/// Adds independent N(0, sigma^2) noise to every entry; sigma = 0 returns an exact copy.
ParameterSet perturb(const ParameterSet& params, double sigma, std::uint64_t seed);

/// Fraction of rows whose argmax prediction equals the label.
double accuracy(const MlpSpec& spec, const ParameterSet& params, const Batch& batch,
                std::size_t task);

}  // namespace cplab::nn
