#include "did/localization.hpp"

#include <algorithm>
#include <stdexcept>

namespace did {

std::size_t Mask::count() const {
    std::size_t n = 0;
    for (std::uint8_t v : fg) n += (v != 0);
    return n;
}

Tensor upsample_map(const Tensor& map, std::size_t out_h, std::size_t out_w) {
    return bilinear_upsample(map, out_h, out_w);
}

Mask threshold_mask(const Tensor& map, double lambda) {
    if (map.rank() != 2)
        throw std::invalid_argument("threshold_mask: rank-2 map required, got " +
                                    shape_string(map));
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("threshold_mask: lambda must lie in (0,1)");
    const std::size_t h = map.extent(0), w = map.extent(1);
    Mask mask{h, w, std::vector<std::uint8_t>(h * w, 0)};
    double mx = map(0);
    for (std::size_t i = 0; i < map.size(); ++i) mx = std::max(mx, map.data()[i]);
    if (mx <= 0.0) {
        std::fill(mask.fg.begin(), mask.fg.end(), std::uint8_t{1});
        return mask;
    }
    const double threshold = lambda * mx;
    for (std::size_t i = 0; i < map.size(); ++i) mask.fg[i] = map.data()[i] >= threshold ? 1 : 0;
    return mask;
}

BoundingBox largest_component_bbox(const Mask& mask) {
    const std::size_t h = mask.height, w = mask.width;
    if (h == 0 || w == 0 || mask.fg.size() != h * w)
        throw std::invalid_argument("largest_component_bbox: malformed mask");
    std::vector<std::uint8_t> seen(h * w, 0);
    std::vector<std::size_t> queue;
    BoundingBox best;
    std::size_t best_size = 0;
    for (std::size_t start = 0; start < h * w; ++start) {
        if (!mask.fg[start] || seen[start]) continue;
        // Flood fill over 4-neighbours; first-met component wins size ties.
        queue.assign(1, start);
        seen[start] = 1;
        BoundingBox box{start % w, start / w, start % w, start / w};
        std::size_t size = 0;
        while (!queue.empty()) {
            const std::size_t p = queue.back();
            queue.pop_back();
            ++size;
            const std::size_t y = p / w, x = p % w;
            box.x0 = std::min(box.x0, x);
            box.x1 = std::max(box.x1, x);
            box.y0 = std::min(box.y0, y);
            box.y1 = std::max(box.y1, y);
            const std::size_t neighbours[4][2] = {
                {y, x + 1}, {y, x == 0 ? w : x - 1}, {y + 1, x}, {y == 0 ? h : y - 1, x}};
            for (const auto& nb : neighbours) {
                if (nb[0] >= h || nb[1] >= w) continue;
                const std::size_t q = nb[0] * w + nb[1];
                if (mask.fg[q] && !seen[q]) {
                    seen[q] = 1;
                    queue.push_back(q);
                }
            }
        }
        if (size > best_size) {
            best_size = size;
            best = box;
        }
    }
    if (best_size == 0) throw std::invalid_argument("largest_component_bbox: empty mask");
    return best;
}

std::vector<InstanceProposal> localize(const InstanceMaps& instance_maps,
                                       const std::vector<std::size_t>& classes,
                                       const std::vector<double>& confidences, double lambda,
                                       std::size_t image_h, std::size_t image_w) {
    if (classes.empty() && confidences.empty()) return {};
    if (instance_maps.maps.rank() != 3 || instance_maps.maps.extent(0) != classes.size() ||
        classes.size() != confidences.size())
        throw std::invalid_argument("localize: class list does not match instance maps");
    const std::size_t h = instance_maps.maps.extent(1), w = instance_maps.maps.extent(2);
    std::vector<InstanceProposal> proposals;
    proposals.reserve(classes.size());
    for (std::size_t s = 0; s < classes.size(); ++s) {
        Tensor map({h, w});
        std::copy_n(instance_maps.maps.data() + s * h * w, h * w, map.data());
        const Tensor up = upsample_map(map, image_h, image_w);
        const Mask mask = threshold_mask(up, lambda);
        proposals.push_back({classes[s], largest_component_bbox(mask), confidences[s]});
    }
    return proposals;
}

} // namespace did
