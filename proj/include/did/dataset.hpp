#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "did/localization.hpp"
#include "did/tensor.hpp"

namespace did {

struct LabeledImage {
    Tensor image;                     // H×W×3 reals in [0,1]
    std::vector<std::uint8_t> labels; // length C, 0/1, at least one positive
};

struct ShapeInstance {
    std::size_t class_id = 0;
    BoundingBox bbox; // tight box of the drawn pixels
};

struct SyntheticSample {
    LabeledImage item;
    std::vector<ShapeInstance> shapes; // generator ground truth
};

// Seeded multi-label shape scenes: 1-3 non-overlapping colored shapes
// (disk, square, triangle, cross) on a noise background. Labels are exactly
// the classes drawn. num_classes restricts which shape kinds appear (max 4).
std::vector<SyntheticSample> generate_synthetic(std::uint64_t seed, std::size_t count,
                                                std::size_t image_size,
                                                std::size_t num_classes = 4);

// Directory of PPM images plus labels.txt, one line per image:
// "<filename> f0 f1 ... f{C-1}".
void save_dataset(const std::vector<SyntheticSample>& samples, const std::string& dir);
std::vector<LabeledImage> load_dataset(const std::string& dir);

} // namespace did
