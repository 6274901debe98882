#include "cplab/nn/mlp.hpp"

#include "cplab/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cplab::nn {

void MlpSpec::validate() const {
    if (input_dim == 0) {
        throw std::invalid_argument("MlpSpec: input_dim must be positive");
    }
    if (head_dims.empty()) {
        throw std::invalid_argument("MlpSpec: at least one head is required");
    }
    for (std::size_t d : hidden_dims) {
        if (d == 0) {
            throw std::invalid_argument("MlpSpec: hidden dimensions must be positive");
        }
    }
    for (std::size_t d : head_dims) {
        if (d == 0) {
            throw std::invalid_argument("MlpSpec: head dimensions must be positive");
        }
    }
}

Layout::Layout(const MlpSpec& spec) {
    spec.validate();
    Eigen::Index offset = 0;
    auto add = [&offset](std::size_t in, std::size_t out) {
        LayerShape s;
        s.fan_in = static_cast<Eigen::Index>(in);
        s.fan_out = static_cast<Eigen::Index>(out);
        s.weight_offset = offset;
        s.bias_offset = offset + s.fan_in * s.fan_out;
        offset = s.bias_offset + s.fan_out;
        return s;
    };
    std::size_t width = spec.input_dim;
    for (std::size_t h : spec.hidden_dims) {
        trunk_.push_back(add(width, h));
        width = h;
    }
    for (std::size_t m : spec.head_dims) {
        heads_.push_back(add(width, m));
    }
    size_ = offset;
}

std::shared_ptr<const Layout> make_layout(const MlpSpec& spec) {
    return std::make_shared<const Layout>(spec);
}

ParameterSet init_params(const MlpSpec& spec, std::uint64_t seed) {
    auto layout = make_layout(spec);
    ParameterSet params = ParameterSet::zeros(layout);
    Rng rng(seed);
    auto fill = [&](const LayerShape& s) {
        const double bound = std::sqrt(6.0 / static_cast<double>(s.fan_in + s.fan_out));
        auto w = params.weight(s);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = rng.uniform(-bound, bound);
            }
        }
    };
    for (const auto& s : layout->trunk()) {
        fill(s);
    }
    for (const auto& s : layout->heads()) {
        fill(s);
    }
    return params;
}

void Batch::validate(std::size_t num_classes) const {
    if (inputs.rows() < 1) {
        throw std::invalid_argument("Batch: at least one sample is required");
    }
    if (static_cast<Eigen::Index>(labels.size()) != inputs.rows()) {
        throw std::invalid_argument("Batch: label count does not match input rows");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            throw std::out_of_range("Batch: label " + std::to_string(y) + " outside [0, " +
                                    std::to_string(num_classes) + ")");
        }
    }
}

Batch Batch::subset(const std::vector<Eigen::Index>& indices) const {
    Batch out;
    out.inputs.resize(static_cast<Eigen::Index>(indices.size()), inputs.cols());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(indices[i]);
        out.labels.push_back(labels[static_cast<std::size_t>(indices[i])]);
    }
    return out;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        const double top = logits.row(n).maxCoeff();
        out.row(n) = (logits.row(n).array() - top).exp();
        out.row(n) /= out.row(n).sum();
    }
    return out;
}

namespace {

void check_params(const MlpSpec& spec, const ParameterSet& params) {
    if (!(params.layout() == Layout(spec))) {
        throw std::invalid_argument("parameter set does not match the network spec");
    }
}

void check_task(const MlpSpec& spec, std::size_t task) {
    if (task >= spec.num_heads()) {
        throw std::out_of_range("task " + std::to_string(task) + " has no head (" +
                                std::to_string(spec.num_heads()) + " heads)");
    }
}

}  // namespace

ForwardPass forward(const MlpSpec& spec, const ParameterSet& params,
                    const Eigen::MatrixXd& inputs, std::size_t task) {
    check_task(spec, task);
    check_params(spec, params);
    if (inputs.cols() != static_cast<Eigen::Index>(spec.input_dim)) {
        throw std::invalid_argument("input width " + std::to_string(inputs.cols()) +
                                    " does not match input_dim " + std::to_string(spec.input_dim));
    }
    ForwardPass fp;
    fp.task = task;
    fp.input = inputs;
    const Eigen::MatrixXd* a = &fp.input;
    fp.hidden.reserve(params.layout().trunk().size());
    for (const auto& s : params.layout().trunk()) {
        Eigen::MatrixXd z = (*a) * params.weight(s);
        z.rowwise() += params.bias(s).transpose();
        fp.hidden.push_back(z.cwiseMax(0.0));
        a = &fp.hidden.back();
    }
    const auto& head = params.layout().heads()[task];
    fp.logits = (*a) * params.weight(head);
    fp.logits.rowwise() += params.bias(head).transpose();
    fp.probs = softmax_rows(fp.logits);
    return fp;
}

GradientSet backward(const MlpSpec& spec, const ParameterSet& params, const ForwardPass& fp,
                     const Eigen::MatrixXd& dlogits) {
    (void)spec;
    GradientSet grad = GradientSet::zeros_like(params);
    const auto& trunk = params.layout().trunk();
    const auto& head = params.layout().heads()[fp.task];

    grad.weight(head).noalias() = fp.trunk_output().transpose() * dlogits;
    grad.bias(head) = dlogits.colwise().sum().transpose();

    Eigen::MatrixXd delta = dlogits * params.weight(head).transpose();
    for (std::size_t l = trunk.size(); l-- > 0;) {
        // ReLU: a = max(z, 0), so a > 0 exactly where z > 0.
        delta = delta.cwiseProduct((fp.hidden[l].array() > 0.0).cast<double>().matrix());
        const Eigen::MatrixXd& below = l == 0 ? fp.input : fp.hidden[l - 1];
        grad.weight(trunk[l]).noalias() = below.transpose() * delta;
        grad.bias(trunk[l]) = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = delta * params.weight(trunk[l]).transpose();
        }
    }
    return grad;
}

GradientSet per_sample_gradient_sums(const MlpSpec& spec, const ParameterSet& params,
                                     const ForwardPass& fp, const Eigen::MatrixXd& dlogits,
                                     SampleReduction reduction) {
    (void)spec;
    const auto h = [reduction](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
        return reduction == SampleReduction::squared ? Eigen::MatrixXd(m.cwiseAbs2())
                                                     : Eigen::MatrixXd(m.cwiseAbs());
    };
    GradientSet grad = GradientSet::zeros_like(params);
    const auto& trunk = params.layout().trunk();
    const auto& head = params.layout().heads()[fp.task];

    Eigen::MatrixXd hd = h(dlogits);
    grad.weight(head).noalias() = h(fp.trunk_output()).transpose() * hd;
    grad.bias(head) = hd.colwise().sum().transpose();

    Eigen::MatrixXd delta = dlogits * params.weight(head).transpose();
    for (std::size_t l = trunk.size(); l-- > 0;) {
        delta = delta.cwiseProduct((fp.hidden[l].array() > 0.0).cast<double>().matrix());
        const Eigen::MatrixXd& below = l == 0 ? fp.input : fp.hidden[l - 1];
        hd = h(delta);
        grad.weight(trunk[l]).noalias() = h(below).transpose() * hd;
        grad.bias(trunk[l]) = hd.colwise().sum().transpose();
        if (l > 0) {
            delta = delta * params.weight(trunk[l]).transpose();
        }
    }
    return grad;
}

Eigen::MatrixXd predict(const MlpSpec& spec, const ParameterSet& params,
                        const Eigen::MatrixXd& inputs, std::size_t task) {
    return forward(spec, params, inputs, task).probs;
}

LossAndGrad loss_and_grad(const MlpSpec& spec, const ParameterSet& params, const Batch& batch,
                          std::size_t task, double beta, const info::Categorical& g,
                          double label_smoothing) {
    check_task(spec, task);
    const std::size_t m = spec.head_dims[task];
    batch.validate(m);
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("loss_and_grad: beta must be finite and nonnegative");
    }
    if (!(label_smoothing >= 0.0 && label_smoothing <= 1.0)) {
        throw std::invalid_argument("loss_and_grad: label smoothing must lie in [0, 1]");
    }
    if (g.size() != m) {
        throw info::InvalidDistribution("loss_and_grad: target distribution has " +
                                        std::to_string(g.size()) + " outcomes, head has " +
                                        std::to_string(m));
    }

    ForwardPass fp = forward(spec, params, batch.inputs, task);
    const Eigen::Index n = batch.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double off_target = label_smoothing / static_cast<double>(m);
    const Eigen::VectorXd log_g = g.log_probs();

    double loss = 0.0;
    Eigen::MatrixXd dlogits = fp.probs;
    for (Eigen::Index row = 0; row < n; ++row) {
        const auto y = static_cast<Eigen::Index>(batch.labels[static_cast<std::size_t>(row)]);
        auto p = fp.probs.row(row);
        if (label_smoothing == 0.0) {
            loss -= info::floored_log(p(y));
            dlogits(row, y) -= 1.0;
        } else {
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                const double target = off_target + (k == y ? 1.0 - label_smoothing : 0.0);
                loss -= target * info::floored_log(p(k));
                dlogits(row, k) -= target;
            }
        }
        if (beta > 0.0) {
            Eigen::RowVectorXd log_ratio(p.size());
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                log_ratio(k) = info::floored_log(p(k)) - log_g(k);
            }
            const double kl = p.dot(log_ratio);
            loss += beta * kl;
            dlogits.row(row) += beta * (p.cwiseProduct(log_ratio) - kl * p);
        }
    }
    dlogits *= inv_n;
    return {loss * inv_n, backward(spec, params, fp, dlogits)};
}

double cross_entropy(const MlpSpec& spec, const ParameterSet& params, const Batch& batch,
                     std::size_t task) {
    check_task(spec, task);
    batch.validate(spec.head_dims[task]);
    const Eigen::MatrixXd probs = predict(spec, params, batch.inputs, task);
    double loss = 0.0;
    for (Eigen::Index row = 0; row < probs.rows(); ++row) {
        loss -= info::floored_log(probs(row, batch.labels[static_cast<std::size_t>(row)]));
    }
    return loss / static_cast<double>(probs.rows());
}

ParameterSet perturb(const ParameterSet& params, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("perturb: sigma must be finite and nonnegative");
    }
    ParameterSet out = params;
    if (sigma == 0.0) {
        return out;
    }
    Rng rng(seed);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.values()(i) += sigma * rng.normal();
    }
    return out;
}

double accuracy(const MlpSpec& spec, const ParameterSet& params, const Batch& batch,
                std::size_t task) {
    check_task(spec, task);
    batch.validate(spec.head_dims[task]);
    const Eigen::MatrixXd probs = predict(spec, params, batch.inputs, task);
    Eigen::Index correct = 0;
    for (Eigen::Index row = 0; row < probs.rows(); ++row) {
        Eigen::Index best = 0;
        probs.row(row).maxCoeff(&best);
        if (best == batch.labels[static_cast<std::size_t>(row)]) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

}  // namespace cplab::nn
