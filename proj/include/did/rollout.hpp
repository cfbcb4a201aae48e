#pragma once

#include <vector>

#include "did/tensor.hpp"

namespace did {

// Divide each column of a square matrix by its sum. Throws if a column sum is
// not strictly positive (cannot happen downstream of layer_aggregate, whose
// +I keeps every column sum >= 1).
Tensor normc(const Tensor& m);

// heads×(N+1)×(N+1) post-softmax attention -> column-normalized head mean
// plus identity: normc(mean_h W_h + I).
Tensor layer_aggregate(const Tensor& heads);

// Left-to-right product G_1·G_2·…·G_L of the per-layer aggregates.
Tensor rollout(const std::vector<Tensor>& layers);

// Class-token attention over patches: row 0 of V without the class column,
// reshaped to the √N×√N patch grid (same raster order as reshape_tokens).
Tensor extract_class_row(const Tensor& v);

} // namespace did
