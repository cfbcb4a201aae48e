#include "did/category.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "binio.hpp"
#include "did/rng.hpp"

namespace did {

namespace {
constexpr std::uint64_t kHeadMagic = 0x3148444944ULL; // "DIDH1"
}

Tensor reshape_tokens(const Tensor& patch_tokens) {
    if (patch_tokens.rank() != 2)
        throw std::invalid_argument("reshape_tokens: N×D tensor required, got " +
                                    shape_string(patch_tokens));
    const std::size_t n = patch_tokens.extent(0), d = patch_tokens.extent(1);
    const std::size_t side = static_cast<std::size_t>(std::llround(std::sqrt(double(n))));
    if (side * side != n)
        throw std::invalid_argument("reshape_tokens: token count " + std::to_string(n) +
                                    " is not a perfect square");
    Tensor grid({d, side, side});
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t c = 0; c < d; ++c) grid(c, t / side, t % side) = patch_tokens(t, c);
    return grid;
}

Tensor flatten_tokens(const Tensor& grid) {
    if (grid.rank() != 3 || grid.extent(1) != grid.extent(2))
        throw std::invalid_argument("flatten_tokens: D×h×h tensor required, got " +
                                    shape_string(grid));
    const std::size_t d = grid.extent(0), side = grid.extent(1);
    Tensor tokens({side * side, d});
    for (std::size_t t = 0; t < side * side; ++t)
        for (std::size_t c = 0; c < d; ++c) tokens(t, c) = grid(c, t / side, t % side);
    return tokens;
}

Tensor project_categories(const Tensor& grid, const Tensor& kernel) {
    if (grid.rank() != 3)
        throw std::invalid_argument("project_categories: D×h×w tensor required, got " +
                                    shape_string(grid));
    if (kernel.rank() != 2 || kernel.extent(1) != grid.extent(0))
        throw std::invalid_argument("project_categories: kernel " + shape_string(kernel) +
                                    " does not match feature grid " + shape_string(grid));
    const std::size_t d = grid.extent(0), h = grid.extent(1), w = grid.extent(2);
    const std::size_t num_classes = kernel.extent(0);
    Tensor maps({num_classes, h, w});
    const std::size_t hw = h * w;
    for (std::size_t c = 0; c < num_classes; ++c) {
        double* dst = maps.data() + c * hw;
        for (std::size_t ch = 0; ch < d; ++ch) {
            const double k = kernel(c, ch);
            const double* src = grid.data() + ch * hw;
            for (std::size_t i = 0; i < hw; ++i) dst[i] += k * src[i];
        }
    }
    return maps;
}

std::vector<double> pool_scores(const Tensor& category_maps) {
    return average_pool_spatial(category_maps);
}

SelectOrder parse_select_order(const std::string& name) {
    if (name == "descending") return SelectOrder::kDescending;
    if (name == "ascending") return SelectOrder::kAscending;
    if (name == "random") return SelectOrder::kRandom;
    throw std::invalid_argument("unknown selection order: " + name);
}

std::string to_string(SelectOrder order) {
    switch (order) {
    case SelectOrder::kDescending: return "descending";
    case SelectOrder::kAscending: return "ascending";
    case SelectOrder::kRandom: return "random";
    }
    return "?";
}

std::vector<std::size_t> select_topn(const std::vector<double>& scores, std::size_t n,
                                     SelectOrder order, std::uint64_t seed) {
    const std::size_t c = scores.size();
    const std::size_t take = std::min(n, c);
    std::vector<std::size_t> idx(c);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    switch (order) {
    case SelectOrder::kDescending:
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
        break;
    case SelectOrder::kAscending:
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
        break;
    case SelectOrder::kRandom: {
        Rng rng(seed);
        // Fisher-Yates over the prefix we keep.
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.index(c - i));
            std::swap(idx[i], idx[j]);
        }
        break;
    }
    }
    idx.resize(take);
    return idx;
}

Tensor init_head(std::size_t num_classes, std::size_t dim, std::uint64_t seed) {
    if (num_classes == 0 || dim == 0)
        throw std::invalid_argument("init_head: extents must be positive");
    Rng rng(seed);
    const double bound = std::sqrt(6.0 / static_cast<double>(num_classes + dim));
    Tensor kernel({num_classes, dim});
    for (std::size_t i = 0; i < kernel.size(); ++i) kernel(i) = rng.uniform(-bound, bound);
    return kernel;
}

void save_head(const Tensor& kernel, const std::string& path) {
    if (kernel.rank() != 2) throw std::invalid_argument("save_head: C×D kernel required");
    std::ofstream os = binio::open_out(path);
    binio::put_u64(os, kHeadMagic);
    binio::put_u64(os, kernel.extent(0));
    binio::put_u64(os, kernel.extent(1));
    binio::put_f64s(os, kernel.data(), kernel.size());
    if (!os) throw std::runtime_error("save_head: write failed for " + path);
}

Tensor load_head(const std::string& path) {
    std::ifstream is = binio::open_in(path);
    if (binio::get_u64(is) != kHeadMagic)
        throw std::runtime_error("load_head: bad magic in " + path);
    const std::size_t c = binio::get_u64(is);
    const std::size_t d = binio::get_u64(is);
    Tensor kernel({c, d});
    binio::get_f64s(is, kernel.data(), kernel.size());
    return kernel;
}

} // namespace did
