#include "cplab/harness/idx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

namespace cplab::harness {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IdxFormatError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const char* what) {
    if (offset + 4 > bytes.size()) {
        throw IdxFormatError(std::string(what) + ": truncated header");
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

IdxDataset parse_idx(const std::vector<std::uint8_t>& image_bytes,
                     const std::vector<std::uint8_t>& label_bytes) {
    const std::uint32_t image_magic = read_be32(image_bytes, 0, "images");
    if (image_magic != kIdxImageMagic) {
        throw IdxFormatError("images: bad magic number " + std::to_string(image_magic));
    }
    const std::uint32_t count = read_be32(image_bytes, 4, "images");
    const std::uint32_t rows = read_be32(image_bytes, 8, "images");
    const std::uint32_t cols = read_be32(image_bytes, 12, "images");

    const std::uint32_t label_magic = read_be32(label_bytes, 0, "labels");
    if (label_magic != kIdxLabelMagic) {
        throw IdxFormatError("labels: bad magic number " + std::to_string(label_magic));
    }
    const std::uint32_t label_count = read_be32(label_bytes, 4, "labels");
    if (label_count != count) {
        throw IdxFormatError("image count " + std::to_string(count) +
                             " does not match label count " + std::to_string(label_count));
    }

    const std::size_t pixels = std::size_t{rows} * cols;
    if (image_bytes.size() < 16 + std::size_t{count} * pixels) {
        throw IdxFormatError("images: truncated pixel data");
    }
    if (label_bytes.size() < 8 + std::size_t{count}) {
        throw IdxFormatError("labels: truncated label data");
    }

    IdxDataset out;
    out.rows = rows;
    out.cols = cols;
    out.inputs.resize(count, static_cast<Eigen::Index>(pixels));
    const std::uint8_t* px = image_bytes.data() + 16;
    for (std::uint32_t n = 0; n < count; ++n) {
        for (std::size_t i = 0; i < pixels; ++i) {
            out.inputs(n, static_cast<Eigen::Index>(i)) = static_cast<double>(*px++) / 255.0;
        }
    }
    out.labels.assign(label_bytes.begin() + 8, label_bytes.begin() + 8 + count);
    return out;
}

IdxDataset load_idx(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path) {
    return parse_idx(read_file(images_path), read_file(labels_path));
}

std::vector<std::uint8_t> encode_idx_images(const Eigen::MatrixXd& inputs, std::size_t rows,
                                            std::size_t cols) {
    if (static_cast<std::size_t>(inputs.cols()) != rows * cols) {
        throw std::invalid_argument("encode_idx_images: width does not match rows * cols");
    }
    std::vector<std::uint8_t> out;
    out.reserve(16 + static_cast<std::size_t>(inputs.size()));
    put_be32(out, kIdxImageMagic);
    put_be32(out, static_cast<std::uint32_t>(inputs.rows()));
    put_be32(out, static_cast<std::uint32_t>(rows));
    put_be32(out, static_cast<std::uint32_t>(cols));
    for (Eigen::Index n = 0; n < inputs.rows(); ++n) {
        for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
            const double v = std::clamp(inputs(n, i), 0.0, 1.0);
            out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_idx_labels(const std::vector<int>& labels) {
    std::vector<std::uint8_t> out;
    put_be32(out, kIdxLabelMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int y : labels) {
        out.push_back(static_cast<std::uint8_t>(y));
    }
    return out;
}

}  // namespace cplab::harness
