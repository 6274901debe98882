#pragma once

#include "cplab/cl/importance.hpp"
#include "cplab/harness/tasks.hpp"
#include "cplab/nn/optimizer.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cplab::harness {

enum class Method { none, ewc, si, mas, rwalk };
/// Output regularizer: KL to uniform (cpr), smoothed CE targets (ls), or nothing.
enum class WlmMode { off, cpr, ls };

std::string_view to_string(Method m);
std::string_view to_string(WlmMode m);
Method parse_method(std::string_view text);
WlmMode parse_wlm(std::string_view text);

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    Method method = Method::none;
    double lambda = 0.0;
    double beta = 0.0;
    WlmMode wlm = WlmMode::cpr;
    /// Smoothing weight of the uniform component when wlm == ls.
    double ls_alpha = 0.1;

    std::size_t epochs = 2;
    std::size_t batch_size = 128;
    nn::OptimizerSettings optimizer;
    std::vector<std::size_t> hidden_dims{256, 256};

    GeneratorSettings generator;
    /// IDX sources for permuted / rotated / split generators.
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    /// Cap on source samples per split (0 keeps all).
    std::size_t source_limit = 0;

    double si_damping = 0.1;
    double rwalk_alpha = 0.9;
    cl::Accumulation accumulation = cl::Accumulation::sum;

    std::uint64_t seed = 0;
    std::string output_dir = "out";

    /// Throws ConfigError on an inconsistent configuration.
    void validate() const;

    /// Regularization strengths from the published best-hyperparameter table
    /// (CIFAR-100 column): EWC 12000/0.5, SI 1/0.8, MAS 3/0.5, RWalk 8/0.9.
    static ExperimentConfig published_defaults(Method method);

    /// Desk-scale defaults: 784-256-256 ReLU trunk, Adam at 1e-3, 2 epochs, batch 128.
    static ExperimentConfig desk_defaults();
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses "key = value" lines; '#' starts a comment. Unknown keys and
/// malformed values throw ConfigError naming the line.
KeyValues parse_key_values(std::string_view text);
/// Applies key-values on top of `base`.
ExperimentConfig apply_key_values(ExperimentConfig base, const KeyValues& kv);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// Flat echo of every field, in a stable order; parseable by parse_key_values.
KeyValues to_key_values(const ExperimentConfig& config);
std::string format_key_values(const KeyValues& kv);

/// Loads the IDX sources named in the config (if any) into generator.source.
void attach_idx_source(ExperimentConfig& config);

}  // namespace cplab::harness
