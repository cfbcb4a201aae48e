#include "did/reconstraint.hpp"

#include <stdexcept>

namespace did {

Strategy parse_strategy(const std::string& name) {
    if (name == "hadamard") return Strategy::kHadamard;
    if (name == "sum") return Strategy::kSum;
    if (name == "identity") return Strategy::kIdentity;
    throw std::invalid_argument("unknown re-constraint strategy: " + name);
}

std::string to_string(Strategy strategy) {
    switch (strategy) {
    case Strategy::kHadamard: return "hadamard";
    case Strategy::kSum: return "sum";
    case Strategy::kIdentity: return "identity";
    }
    return "?";
}

InstanceMaps apply_strategy(const Tensor& selected_maps, const Tensor& prior, Strategy strategy) {
    if (selected_maps.rank() != 3)
        throw std::invalid_argument("apply_strategy: n_sel×h×w maps required, got " +
                                    shape_string(selected_maps));
    if (prior.rank() != 2 || prior.extent(0) != selected_maps.extent(1) ||
        prior.extent(1) != selected_maps.extent(2))
        throw std::invalid_argument("apply_strategy: prior " + shape_string(prior) +
                                    " does not match maps " + shape_string(selected_maps));
    InstanceMaps out{selected_maps, strategy};
    if (strategy == Strategy::kIdentity) return out;
    const std::size_t hw = prior.size();
    const double* p = prior.data();
    for (std::size_t c = 0; c < selected_maps.extent(0); ++c) {
        double* dst = out.maps.data() + c * hw;
        if (strategy == Strategy::kHadamard)
            for (std::size_t i = 0; i < hw; ++i) dst[i] *= p[i];
        else
            for (std::size_t i = 0; i < hw; ++i) dst[i] += p[i];
    }
    return out;
}

} // namespace did
