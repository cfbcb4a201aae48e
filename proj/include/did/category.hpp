#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "did/tensor.hpp"

namespace did {

// N×D patch tokens -> D×h×w grid, h=w=√N, token t at (t/w, t%w).
Tensor reshape_tokens(const Tensor& patch_tokens);

// Inverse of reshape_tokens.
Tensor flatten_tokens(const Tensor& grid);

// Per-position linear map over channels: maps(c,i,j) = Σ_d grid(d,i,j)·kernel(c,d).
// kernel is the C×D head applied as a 1×1 convolution.
Tensor project_categories(const Tensor& grid, const Tensor& kernel);

// Spatial mean per class map: C×h×w -> length-C confidence vector (pre-sigmoid).
std::vector<double> pool_scores(const Tensor& category_maps);

enum class SelectOrder { kDescending, kAscending, kRandom };

SelectOrder parse_select_order(const std::string& name);
std::string to_string(SelectOrder order);

// min(n, C) class indices in the requested order. Ties break toward the lower
// class index; random mode is a seeded sample without replacement.
std::vector<std::size_t> select_topn(const std::vector<double>& scores, std::size_t n,
                                     SelectOrder order, std::uint64_t seed);

// Seeded Glorot-range init of the C×D category head.
Tensor init_head(std::size_t num_classes, std::size_t dim, std::uint64_t seed);

void save_head(const Tensor& kernel, const std::string& path);
Tensor load_head(const std::string& path);

} // namespace did
