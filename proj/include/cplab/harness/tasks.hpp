#pragma once

#include "cplab/nn/mlp.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cplab::harness {

enum class GeneratorKind { permuted, rotated, split, blobs };

std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator(std::string_view text);

/// Labelled image data that the permuted, rotated and split generators derive tasks from.
struct SourceData {
    nn::Batch train;
    nn::Batch test;
    std::size_t num_classes = 10;
    std::size_t image_rows = 0;
    std::size_t image_cols = 0;
};

struct GeneratorSettings {
    GeneratorKind kind = GeneratorKind::blobs;
    std::size_t num_tasks = 3;

    // blobs: classes_per_task Gaussian clusters in input_dim dimensions with
    // unit-variance noise; any two class means of a task are 2 * separation apart.
    std::size_t classes_per_task = 2;
    std::size_t input_dim = 2;
    double separation = 3.0;
    std::size_t train_per_class = 100;
    std::size_t test_per_class = 100;

    /// rotated: task t is rotated by t * rotation_step degrees.
    double rotation_step = 10.0;
    /// Share of each training split held out as validation (0 disables).
    double validation_fraction = 0.0;

    std::shared_ptr<const SourceData> source;

    void validate() const;
};

struct Task {
    nn::Batch train;
    nn::Batch validation;  ///< may be empty
    nn::Batch test;
    std::size_t num_classes = 0;
};

struct TaskSequence {
    GeneratorKind kind = GeneratorKind::blobs;
    std::size_t input_dim = 0;
    std::vector<Task> tasks;

    [[nodiscard]] std::size_t size() const noexcept { return tasks.size(); }
    [[nodiscard]] std::vector<std::size_t> head_dims() const;
};

/// Deterministic under `seed`. Throws std::invalid_argument when the settings
/// cannot produce the requested tasks (e.g. too few classes for a split).
TaskSequence make_tasks(const GeneratorSettings& settings, std::uint64_t seed);

/// Bilinear rotation of a row-major rows x cols image about its center; pixels
/// sampled from outside the image read as 0.
Eigen::RowVectorXd rotate_image(const Eigen::Ref<const Eigen::RowVectorXd>& image,
                                std::size_t rows, std::size_t cols, double degrees);

}  // namespace cplab::harness
