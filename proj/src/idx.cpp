#include "unlearn/idx.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <vector>

#include "unlearn/errors.hpp"

namespace unlearn {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw MalformedIdx("truncated idx header in " + path, "idx");
    }
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) | static_cast<std::uint32_t>(bytes[3]);
}

} // namespace

Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path,
                      const std::set<int>& keep_labels) {
    if (keep_labels.empty()) {
        throw EmptySelection("keep_labels must be nonempty", "idx.keep_labels");
    }

    std::ifstream images(images_path, std::ios::binary);
    if (!images) {
        throw IoError("cannot open idx images file: " + images_path, "idx.images");
    }
    if (read_be_u32(images, images_path) != kImageMagic) {
        throw MalformedIdx("bad image magic in " + images_path, "idx.images");
    }
    const std::uint32_t count = read_be_u32(images, images_path);
    const std::uint32_t rows = read_be_u32(images, images_path);
    const std::uint32_t cols = read_be_u32(images, images_path);
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    if (pixels == 0) {
        throw MalformedIdx("zero image dimensions in " + images_path, "idx.images");
    }

    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) {
        throw IoError("cannot open idx labels file: " + labels_path, "idx.labels");
    }
    if (read_be_u32(labels, labels_path) != kLabelMagic) {
        throw MalformedIdx("bad label magic in " + labels_path, "idx.labels");
    }
    if (read_be_u32(labels, labels_path) != count) {
        throw MalformedIdx("image/label counts disagree", "idx");
    }

    std::vector<unsigned char> image(pixels);
    std::vector<DataPoint> kept;
    std::map<int, int> remap; // ascending original label -> compact label
    for (int l : keep_labels) {
        const int next = static_cast<int>(remap.size());
        remap[l] = next;
    }

    for (std::uint32_t i = 0; i < count; ++i) {
        if (!images.read(reinterpret_cast<char*>(image.data()), static_cast<std::streamsize>(pixels))) {
            throw MalformedIdx("truncated image payload in " + images_path, "idx.images");
        }
        char raw_label;
        if (!labels.read(&raw_label, 1)) {
            throw MalformedIdx("truncated label payload in " + labels_path, "idx.labels");
        }
        const int label = static_cast<unsigned char>(raw_label);
        const auto it = remap.find(label);
        if (it == remap.end()) continue;
        DataPoint p;
        p.label = it->second;
        p.features.resize(static_cast<Eigen::Index>(pixels));
        for (std::size_t j = 0; j < pixels; ++j) {
            p.features[static_cast<Eigen::Index>(j)] = static_cast<double>(image[j]) / 255.0;
        }
        kept.push_back(std::move(p));
    }
    if (kept.empty()) {
        throw EmptySelection("no points match the label filter", "idx.keep_labels");
    }
    return Dataset(std::move(kept), static_cast<int>(remap.size()));
}

} // namespace unlearn
