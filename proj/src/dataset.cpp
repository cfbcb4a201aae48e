#include "did/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "did/netpbm.hpp"
#include "did/rng.hpp"

namespace did {

namespace {

// disk, square, triangle, cross
constexpr double kClassColors[4][3] = {
    {0.90, 0.15, 0.15},
    {0.15, 0.85, 0.20},
    {0.20, 0.25, 0.90},
    {0.90, 0.85, 0.15},
};

bool inside_shape(std::size_t cls, long y, long x, long cy, long cx, long rad) {
    const long dy = y - cy, dx = x - cx;
    switch (cls) {
    case 0: return dy * dy + dx * dx <= rad * rad;
    case 1: return std::labs(dy) <= rad && std::labs(dx) <= rad;
    case 2: // upward triangle: half-width grows with the row
        return dy >= -rad && dy <= rad && std::labs(dx) * 2 <= dy + rad;
    default: {
        const long arm = std::max<long>(1, rad / 3);
        return (std::labs(dy) <= arm && std::labs(dx) <= rad) ||
               (std::labs(dx) <= arm && std::labs(dy) <= rad);
    }
    }
}

bool boxes_overlap(const BoundingBox& a, const BoundingBox& b) {
    return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
}

} // namespace

std::vector<SyntheticSample> generate_synthetic(std::uint64_t seed, std::size_t count,
                                                std::size_t image_size,
                                                std::size_t num_classes) {
    if (num_classes == 0 || num_classes > 4)
        throw std::invalid_argument("generate_synthetic: 1..4 shape classes supported");
    if (image_size < 16)
        throw std::invalid_argument("generate_synthetic: image size too small");
    Rng rng(seed);
    const long size = static_cast<long>(image_size);
    const long rad_min = std::max<long>(4, size / 10);
    const long rad_max = std::max<long>(rad_min + 1, size / 5);

    std::vector<SyntheticSample> samples;
    samples.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        SyntheticSample sample;
        sample.item.image = Tensor({image_size, image_size, 3});
        Tensor& img = sample.item.image;
        for (std::size_t i = 0; i < img.size(); ++i) img(i) = rng.uniform(0.35, 0.65);
        sample.item.labels.assign(num_classes, 0);

        const std::size_t target = 1 + static_cast<std::size_t>(rng.index(3));
        std::vector<BoundingBox> occupied;
        for (std::size_t k = 0; k < target; ++k) {
            bool placed = false;
            for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
                const std::size_t cls = static_cast<std::size_t>(rng.index(num_classes));
                const long rad =
                    rad_min + static_cast<long>(rng.index(std::uint64_t(rad_max - rad_min + 1)));
                const long cy = rad + static_cast<long>(rng.index(std::uint64_t(size - 2 * rad)));
                const long cx = rad + static_cast<long>(rng.index(std::uint64_t(size - 2 * rad)));
                double color[3];
                for (int c = 0; c < 3; ++c)
                    color[c] = std::clamp(kClassColors[cls][c] + rng.uniform(-0.05, 0.05), 0.0, 1.0);

                const BoundingBox extent{std::size_t(cx - rad), std::size_t(cy - rad),
                                         std::size_t(cx + rad), std::size_t(cy + rad)};
                bool clash = false;
                for (const BoundingBox& other : occupied)
                    clash = clash || boxes_overlap(extent, other);
                if (clash) continue;

                // Draw and record the tight box of the pixels actually set.
                BoundingBox tight{image_size, image_size, 0, 0};
                for (long y = cy - rad; y <= cy + rad; ++y) {
                    for (long x = cx - rad; x <= cx + rad; ++x) {
                        if (!inside_shape(cls, y, x, cy, cx, rad)) continue;
                        for (int c = 0; c < 3; ++c)
                            img(std::size_t(y), std::size_t(x), std::size_t(c)) = color[c];
                        tight.x0 = std::min(tight.x0, std::size_t(x));
                        tight.x1 = std::max(tight.x1, std::size_t(x));
                        tight.y0 = std::min(tight.y0, std::size_t(y));
                        tight.y1 = std::max(tight.y1, std::size_t(y));
                    }
                }
                occupied.push_back(extent);
                sample.item.labels[cls] = 1;
                sample.shapes.push_back({cls, tight});
                placed = true;
            }
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

void save_dataset(const std::vector<SyntheticSample>& samples, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(std::filesystem::path(dir) / "labels.txt", std::ios::trunc);
    if (!manifest) throw std::runtime_error("save_dataset: cannot write manifest in " + dir);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::ostringstream name;
        name << "img_" << std::setw(5) << std::setfill('0') << i << ".ppm";
        write_ppm(samples[i].item.image, (std::filesystem::path(dir) / name.str()).string());
        manifest << name.str();
        for (std::uint8_t flag : samples[i].item.labels) manifest << ' ' << int(flag);
        manifest << '\n';
    }
    if (!manifest) throw std::runtime_error("save_dataset: manifest write failed in " + dir);
}

std::vector<LabeledImage> load_dataset(const std::string& dir) {
    std::ifstream manifest(std::filesystem::path(dir) / "labels.txt");
    if (!manifest) throw std::runtime_error("load_dataset: missing labels.txt in " + dir);
    std::vector<LabeledImage> images;
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string name;
        is >> name;
        LabeledImage item;
        int flag;
        while (is >> flag) item.labels.push_back(flag ? 1 : 0);
        if (item.labels.empty())
            throw std::runtime_error("load_dataset: malformed manifest line: " + line);
        item.image = read_ppm((std::filesystem::path(dir) / name).string());
        images.push_back(std::move(item));
    }
    return images;
}

} // namespace did
