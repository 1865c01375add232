#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "infinet/dataset.hpp"

namespace infinet {

// IDX (MNIST) ingest. All integers are big-endian:
//   images: u32 magic 0x00000803, u32 count, u32 rows, u32 cols, then
//           count*rows*cols unsigned bytes, row-major per image
//   labels: u32 magic 0x00000801, u32 count, then count unsigned bytes

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                      std::istreambuf_iterator<char>());
}

inline std::uint32_t be_u32_at(const std::vector<unsigned char>& bytes, std::size_t offset,
                               const std::string& path) {
    if (offset + 4 > bytes.size()) throw DataError("idx: truncated header in " + path);
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Loads an IDX image/label file pair into a Dataset, flattening images
/// row-major and applying the requested normalization (Scale255 divides by
/// 255; UnitNorm additionally scales rows to unit length).
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                        Normalization normalization = Normalization::Scale255) {
    const auto image_bytes = detail::read_file_bytes(images_path);
    const auto label_bytes = detail::read_file_bytes(labels_path);

    const std::uint32_t image_magic = detail::be_u32_at(image_bytes, 0, images_path);
    if (image_magic != kIdxImageMagic)
        throw DataError("idx: bad image magic in " + images_path + " (got " +
                        std::to_string(image_magic) + ")");
    const std::uint32_t n_images = detail::be_u32_at(image_bytes, 4, images_path);
    const std::uint32_t rows = detail::be_u32_at(image_bytes, 8, images_path);
    const std::uint32_t cols = detail::be_u32_at(image_bytes, 12, images_path);

    const std::uint32_t label_magic = detail::be_u32_at(label_bytes, 0, labels_path);
    if (label_magic != kIdxLabelMagic)
        throw DataError("idx: bad label magic in " + labels_path + " (got " +
                        std::to_string(label_magic) + ")");
    const std::uint32_t n_labels = detail::be_u32_at(label_bytes, 4, labels_path);

    if (n_images != n_labels)
        throw DataError("idx: count mismatch: " + std::to_string(n_images) + " images vs " +
                        std::to_string(n_labels) + " labels");

    const std::size_t d = static_cast<std::size_t>(rows) * cols;
    if (image_bytes.size() < 16 + static_cast<std::size_t>(n_images) * d)
        throw DataError("idx: truncated image data in " + images_path);
    if (label_bytes.size() < 8 + n_labels)
        throw DataError("idx: truncated label data in " + labels_path);

    Dataset out;
    out.instances.resize(static_cast<long>(n_images), static_cast<long>(d));
    out.labels.resize(n_labels);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        const std::size_t base = 16 + static_cast<std::size_t>(i) * d;
        for (std::size_t k = 0; k < d; ++k)
            out.instances(static_cast<long>(i), static_cast<long>(k)) =
                static_cast<double>(image_bytes[base + k]);
    }
    int max_label = 0;
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        out.labels[i] = static_cast<int>(label_bytes[8 + i]);
        max_label = std::max(max_label, out.labels[i]);
    }
    out.num_classes = max_label + 1;

    if (normalization == Normalization::Scale255 || normalization == Normalization::UnitNorm)
        out.instances /= 255.0;
    out.normalization =
        normalization == Normalization::UnitNorm ? Normalization::Scale255 : normalization;
    if (normalization == Normalization::UnitNorm) out.unit_normalize();

    out.provenance = images_path + ";" + labels_path + "#fnv=" +
                     to_hex(fnv1a64(label_bytes.data(), label_bytes.size(),
                                    fnv1a64(image_bytes.data(), image_bytes.size())));
    out.validate();
    return out;
}

}  // namespace infinet
