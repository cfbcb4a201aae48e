#pragma once

#include <string>

#include "did/tensor.hpp"

namespace did {

// The three ways of fusing the rollout prior into selected category maps:
// elementwise product, elementwise sum, or no fusion at all.
enum class Strategy { kHadamard, kSum, kIdentity };

Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy strategy);

struct InstanceMaps {
    Tensor maps; // n_sel×h×w
    Strategy strategy = Strategy::kHadamard;
};

// selected_maps: n_sel×h×w category maps; prior: h×w rollout map.
InstanceMaps apply_strategy(const Tensor& selected_maps, const Tensor& prior, Strategy strategy);

} // namespace did
