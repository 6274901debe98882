#include "cplab/harness/tasks.hpp"

#include "cplab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cplab::harness {

std::string_view to_string(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::permuted: return "permuted";
        case GeneratorKind::rotated: return "rotated";
        case GeneratorKind::split: return "split";
        case GeneratorKind::blobs: return "blobs";
    }
    return "blobs";
}

GeneratorKind parse_generator(std::string_view text) {
    if (text == "permuted") return GeneratorKind::permuted;
    if (text == "rotated") return GeneratorKind::rotated;
    if (text == "split") return GeneratorKind::split;
    if (text == "blobs") return GeneratorKind::blobs;
    throw std::invalid_argument("unknown generator '" + std::string(text) + "'");
}

void GeneratorSettings::validate() const {
    if (num_tasks < 1) {
        throw std::invalid_argument("generator: at least one task is required");
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("generator: validation_fraction must lie in [0, 1)");
    }
    if (kind == GeneratorKind::blobs) {
        if (classes_per_task < 2 || input_dim < 1 || train_per_class < 1 || test_per_class < 1) {
            throw std::invalid_argument(
                "blobs: need >= 2 classes, input_dim >= 1 and >= 1 sample per class");
        }
        if (!(separation >= 0.0)) {
            throw std::invalid_argument("blobs: separation must be nonnegative");
        }
        return;
    }
    if (!source) {
        throw std::invalid_argument(std::string(to_string(kind)) +
                                    " generator needs source data (IDX files)");
    }
    if (kind == GeneratorKind::rotated &&
        source->image_rows * source->image_cols != static_cast<std::size_t>(source->train.inputs.cols())) {
        throw std::invalid_argument("rotated: source images have no 2-D shape");
    }
    if (kind == GeneratorKind::split && source->num_classes < 2 * num_tasks) {
        throw std::invalid_argument("split: " + std::to_string(source->num_classes) +
                                    " classes cannot form " + std::to_string(num_tasks) +
                                    " tasks of at least two classes");
    }
}

std::vector<std::size_t> TaskSequence::head_dims() const {
    std::vector<std::size_t> dims;
    dims.reserve(tasks.size());
    for (const auto& t : tasks) {
        dims.push_back(t.num_classes);
    }
    return dims;
}

Eigen::RowVectorXd rotate_image(const Eigen::Ref<const Eigen::RowVectorXd>& image,
                                std::size_t rows, std::size_t cols, double degrees) {
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(r * c);
    if (degrees == 0.0) {
        out = image;
        return out;
    }
    const double theta = degrees * std::numbers::pi / 180.0;
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    const double cy = 0.5 * static_cast<double>(r - 1);
    const double cx = 0.5 * static_cast<double>(c - 1);
    auto pixel = [&](Eigen::Index y, Eigen::Index x) {
        return (y < 0 || y >= r || x < 0 || x >= c) ? 0.0 : image(y * c + x);
    };
    for (Eigen::Index y = 0; y < r; ++y) {
        for (Eigen::Index x = 0; x < c; ++x) {
            // Inverse map: rotate the destination coordinate back by -theta.
            const double dy = static_cast<double>(y) - cy;
            const double dx = static_cast<double>(x) - cx;
            const double sy = cs * dy - sn * dx + cy;
            const double sx = sn * dy + cs * dx + cx;
            const double fy = std::floor(sy);
            const double fx = std::floor(sx);
            const auto y0 = static_cast<Eigen::Index>(fy);
            const auto x0 = static_cast<Eigen::Index>(fx);
            const double wy = sy - fy;
            const double wx = sx - fx;
            out(y * c + x) = (1 - wy) * ((1 - wx) * pixel(y0, x0) + wx * pixel(y0, x0 + 1)) +
                             wy * ((1 - wx) * pixel(y0 + 1, x0) + wx * pixel(y0 + 1, x0 + 1));
        }
    }
    return out;
}

namespace {

void shuffle_indices(std::vector<Eigen::Index>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::swap(idx[i - 1], idx[rng.below(i)]);
    }
}

/// Splits off the validation share from the tail of a shuffled training set.
void carve_validation(Task& task, double fraction, Rng& rng) {
    if (fraction <= 0.0) {
        return;
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(task.train.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    shuffle_indices(idx, rng);
    const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size())));
    if (n_val == 0 || n_val >= idx.size()) {
        return;
    }
    std::vector<Eigen::Index> val(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
    std::vector<Eigen::Index> train(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(n_val));
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    task.validation = task.train.subset(val);
    task.train = task.train.subset(train);
}

nn::Batch map_inputs(const nn::Batch& batch, const std::vector<Eigen::Index>& permutation) {
    nn::Batch out;
    out.labels = batch.labels;
    out.inputs.resize(batch.inputs.rows(), batch.inputs.cols());
    for (Eigen::Index j = 0; j < batch.inputs.cols(); ++j) {
        out.inputs.col(j) = batch.inputs.col(permutation[static_cast<std::size_t>(j)]);
    }
    return out;
}

nn::Batch rotate_batch(const nn::Batch& batch, std::size_t rows, std::size_t cols,
                       double degrees) {
    nn::Batch out;
    out.labels = batch.labels;
    out.inputs.resize(batch.inputs.rows(), batch.inputs.cols());
    for (Eigen::Index n = 0; n < batch.inputs.rows(); ++n) {
        out.inputs.row(n) = rotate_image(batch.inputs.row(n), rows, cols, degrees);
    }
    return out;
}

nn::Batch select_classes(const nn::Batch& batch, const std::vector<int>& classes) {
    std::vector<Eigen::Index> keep;
    std::vector<int> relabel;
    for (std::size_t n = 0; n < batch.labels.size(); ++n) {
        auto it = std::find(classes.begin(), classes.end(), batch.labels[n]);
        if (it != classes.end()) {
            keep.push_back(static_cast<Eigen::Index>(n));
            relabel.push_back(static_cast<int>(it - classes.begin()));
        }
    }
    nn::Batch out = batch.subset(keep);
    out.labels = std::move(relabel);
    return out;
}

/// Class means with pairwise distance 2 * separation: orthonormal directions
/// scaled by sqrt(2) * separation when they fit in the dimension, otherwise
/// independent Gaussian directions normalized to that length.
Eigen::MatrixXd blob_means(std::size_t classes, std::size_t dim, double separation, Rng& rng) {
    Eigen::MatrixXd means(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < means.rows(); ++k) {
        for (Eigen::Index i = 0; i < means.cols(); ++i) {
            means(k, i) = rng.normal();
        }
        if (classes <= dim) {
            for (Eigen::Index j = 0; j < k; ++j) {
                means.row(k) -= means.row(k).dot(means.row(j)) * means.row(j);
            }
        }
        means.row(k).normalize();
    }
    return means * (std::sqrt(2.0) * separation);
}

nn::Batch sample_blobs(const Eigen::MatrixXd& means, std::size_t per_class, Rng& rng) {
    const Eigen::Index classes = means.rows();
    const Eigen::Index dim = means.cols();
    nn::Batch out;
    out.inputs.resize(classes * static_cast<Eigen::Index>(per_class), dim);
    out.labels.reserve(static_cast<std::size_t>(out.inputs.rows()));
    Eigen::Index row = 0;
    for (std::size_t s = 0; s < per_class; ++s) {
        for (Eigen::Index k = 0; k < classes; ++k) {
            for (Eigen::Index i = 0; i < dim; ++i) {
                out.inputs(row, i) = means(k, i) + rng.normal();
            }
            out.labels.push_back(static_cast<int>(k));
            ++row;
        }
    }
    return out;
}

}  // namespace

TaskSequence make_tasks(const GeneratorSettings& settings, std::uint64_t seed) {
    settings.validate();
    TaskSequence seq;
    seq.kind = settings.kind;
    seq.tasks.reserve(settings.num_tasks);

    if (settings.kind == GeneratorKind::blobs) {
        seq.input_dim = settings.input_dim;
        for (std::size_t t = 0; t < settings.num_tasks; ++t) {
            Rng rng(derive_seed(seed, {0x626c6f6273ULL, t}));
            const Eigen::MatrixXd means =
                blob_means(settings.classes_per_task, settings.input_dim, settings.separation, rng);
            Task task;
            task.num_classes = settings.classes_per_task;
            task.train = sample_blobs(means, settings.train_per_class, rng);
            task.test = sample_blobs(means, settings.test_per_class, rng);
            carve_validation(task, settings.validation_fraction, rng);
            seq.tasks.push_back(std::move(task));
        }
        return seq;
    }

    const SourceData& src = *settings.source;
    seq.input_dim = static_cast<std::size_t>(src.train.inputs.cols());
    const auto width = static_cast<Eigen::Index>(seq.input_dim);

    std::vector<int> class_order(src.num_classes);
    std::iota(class_order.begin(), class_order.end(), 0);
    if (settings.kind == GeneratorKind::split) {
        Rng rng(derive_seed(seed, {0x73706c6974ULL}));
        for (std::size_t i = class_order.size(); i > 1; --i) {
            std::swap(class_order[i - 1], class_order[rng.below(i)]);
        }
    }
    const std::size_t per_split = src.num_classes / std::max<std::size_t>(settings.num_tasks, 1);

    for (std::size_t t = 0; t < settings.num_tasks; ++t) {
        Rng rng(derive_seed(seed, {0x7461736bULL, t}));
        Task task;
        switch (settings.kind) {
            case GeneratorKind::permuted: {
                std::vector<Eigen::Index> perm(static_cast<std::size_t>(width));
                std::iota(perm.begin(), perm.end(), Eigen::Index{0});
                if (t > 0) {
                    shuffle_indices(perm, rng);
                }
                task.num_classes = src.num_classes;
                task.train = t == 0 ? src.train : map_inputs(src.train, perm);
                task.test = t == 0 ? src.test : map_inputs(src.test, perm);
                break;
            }
            case GeneratorKind::rotated: {
                const double degrees = static_cast<double>(t) * settings.rotation_step;
                task.num_classes = src.num_classes;
                task.train = rotate_batch(src.train, src.image_rows, src.image_cols, degrees);
                task.test = rotate_batch(src.test, src.image_rows, src.image_cols, degrees);
                break;
            }
            case GeneratorKind::split: {
                std::vector<int> classes(class_order.begin() + static_cast<std::ptrdiff_t>(t * per_split),
                                         class_order.begin() + static_cast<std::ptrdiff_t>((t + 1) * per_split));
                task.num_classes = classes.size();
                task.train = select_classes(src.train, classes);
                task.test = select_classes(src.test, classes);
                if (task.train.size() == 0 || task.test.size() == 0) {
                    throw std::invalid_argument("split: a class group has no samples");
                }
                break;
            }
            case GeneratorKind::blobs:
                break;
        }
        carve_validation(task, settings.validation_fraction, rng);
        seq.tasks.push_back(std::move(task));
    }
    return seq;
}

}  // namespace cplab::harness
