#pragma once

#include <cstdint>
#include <vector>

#include "did/reconstraint.hpp"
#include "did/tensor.hpp"

namespace did {

// Inclusive pixel box: (x0,y0) top-left, (x1,y1) bottom-right.
struct BoundingBox {
    std::size_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    std::size_t width() const { return x1 - x0 + 1; }
    std::size_t height() const { return y1 - y0 + 1; }
    bool operator==(const BoundingBox&) const = default;
};

struct InstanceProposal {
    std::size_t class_id = 0;
    BoundingBox bbox;
    double confidence = 0.0; // sigmoid of the class score, in [0,1]
};

// Boolean foreground grid.
struct Mask {
    std::size_t height = 0, width = 0;
    std::vector<std::uint8_t> fg;

    bool at(std::size_t y, std::size_t x) const { return fg[y * width + x] != 0; }
    std::size_t count() const;
};

// Align-corners bilinear resize of one instance map to raw-image size.
Tensor upsample_map(const Tensor& map, std::size_t out_h, std::size_t out_w);

// Foreground = pixels >= lambda * max(map). A map whose maximum is <= 0 is
// clamped at zero first, which makes the whole image foreground.
Mask threshold_mask(const Tensor& map, double lambda);

// Tight box of the largest 4-connected foreground component; equal sizes
// resolve to the component met first in row-major scan order.
BoundingBox largest_component_bbox(const Mask& mask);

// One proposal per selected class: upsample -> threshold -> largest component.
// confidences are the per-class probabilities aligned with `classes`.
std::vector<InstanceProposal> localize(const InstanceMaps& instance_maps,
                                       const std::vector<std::size_t>& classes,
                                       const std::vector<double>& confidences, double lambda,
                                       std::size_t image_h, std::size_t image_w);

} // namespace did
