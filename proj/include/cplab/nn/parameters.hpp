#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cplab::nn {

enum class Activation { relu };

struct MlpSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    Activation activation = Activation::relu;
    /// One output head per task; head t has head_dims[t] logits.
    std::vector<std::size_t> head_dims;

    /// Throws std::invalid_argument on an empty head list or a zero dimension.
    void validate() const;
    [[nodiscard]] std::size_t num_heads() const noexcept { return head_dims.size(); }
    [[nodiscard]] std::size_t trunk_width() const noexcept {
        return hidden_dims.empty() ? input_dim : hidden_dims.back();
    }

    friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct LayerShape {
    Eigen::Index fan_in = 0;
    Eigen::Index fan_out = 0;
    Eigen::Index weight_offset = 0;
    Eigen::Index bias_offset = 0;

    friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Canonical flattening: trunk layers in order, then heads in task order;
/// inside a layer the fan_in x fan_out weight matrix row-major, then the bias.
class Layout {
public:
    explicit Layout(const MlpSpec& spec);

    [[nodiscard]] const std::vector<LayerShape>& trunk() const noexcept { return trunk_; }
    [[nodiscard]] const std::vector<LayerShape>& heads() const noexcept { return heads_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return size_; }

    friend bool operator==(const Layout& a, const Layout& b) {
        return a.trunk_ == b.trunk_ && a.heads_ == b.heads_;
    }

private:
    std::vector<LayerShape> trunk_;
    std::vector<LayerShape> heads_;
    Eigen::Index size_ = 0;
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WeightMap = Eigen::Map<RowMajorMatrix>;
using ConstWeightMap = Eigen::Map<const RowMajorMatrix>;
using BiasMap = Eigen::Map<Eigen::VectorXd>;
using ConstBiasMap = Eigen::Map<const Eigen::VectorXd>;

/// A flat vector laid out like the network's parameters. The tag keeps
/// parameters, gradients and importance weights from mixing by accident.
template <class Tag>
class FlatParams {
public:
    FlatParams(std::shared_ptr<const Layout> layout, Eigen::VectorXd values)
        : layout_(std::move(layout)), values_(std::move(values)) {
        if (!layout_ || values_.size() != layout_->size()) {
            throw std::invalid_argument("flat vector does not match the parameter layout");
        }
    }

    static FlatParams zeros(std::shared_ptr<const Layout> layout) {
        const Eigen::Index n = layout->size();
        return FlatParams(std::move(layout), Eigen::VectorXd::Zero(n));
    }

    template <class OtherTag>
    static FlatParams zeros_like(const FlatParams<OtherTag>& other) {
        return zeros(other.layout_ptr());
    }

    [[nodiscard]] const Layout& layout() const noexcept { return *layout_; }
    [[nodiscard]] const std::shared_ptr<const Layout>& layout_ptr() const noexcept { return layout_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return values_.size(); }

    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] Eigen::VectorXd& values() noexcept { return values_; }

    [[nodiscard]] ConstWeightMap weight(const LayerShape& s) const {
        return {values_.data() + s.weight_offset, s.fan_in, s.fan_out};
    }
    [[nodiscard]] WeightMap weight(const LayerShape& s) {
        return {values_.data() + s.weight_offset, s.fan_in, s.fan_out};
    }
    [[nodiscard]] ConstBiasMap bias(const LayerShape& s) const {
        return {values_.data() + s.bias_offset, s.fan_out};
    }
    [[nodiscard]] BiasMap bias(const LayerShape& s) {
        return {values_.data() + s.bias_offset, s.fan_out};
    }

    template <class OtherTag>
    [[nodiscard]] bool congruent(const FlatParams<OtherTag>& other) const {
        return layout_ == other.layout_ptr() || *layout_ == other.layout();
    }

    [[nodiscard]] bool all_finite() const { return values_.allFinite(); }

private:
    std::shared_ptr<const Layout> layout_;
    Eigen::VectorXd values_;
};

struct ParameterTag;
struct GradientTag;

using ParameterSet = FlatParams<ParameterTag>;
using GradientSet = FlatParams<GradientTag>;

template <class A, class B>
void require_congruent(const FlatParams<A>& a, const FlatParams<B>& b, const char* what) {
    if (!a.congruent(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}

std::shared_ptr<const Layout> make_layout(const MlpSpec& spec);

/// Glorot-style uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
ParameterSet init_params(const MlpSpec& spec, std::uint64_t seed);

}  // namespace cplab::nn
