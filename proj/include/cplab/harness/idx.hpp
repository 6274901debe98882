#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace cplab::harness {

class IdxFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxDataset {
    Eigen::MatrixXd inputs;  ///< count x (rows * cols), pixels scaled by 1/255
    std::vector<int> labels;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

/// Parses a big-endian IDX image file and its label file (MNIST layout).
IdxDataset load_idx(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path);

/// In-memory variant of load_idx over raw file contents.
IdxDataset parse_idx(const std::vector<std::uint8_t>& image_bytes,
                     const std::vector<std::uint8_t>& label_bytes);

/// Serializes images (values in [0,1], rounded to bytes) and labels in IDX layout.
std::vector<std::uint8_t> encode_idx_images(const Eigen::MatrixXd& inputs, std::size_t rows,
                                            std::size_t cols);
std::vector<std::uint8_t> encode_idx_labels(const std::vector<int>& labels);

}  // namespace cplab::harness
