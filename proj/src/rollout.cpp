#include "did/rollout.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace did {

Tensor normc(const Tensor& m) {
    if (m.rank() != 2 || m.extent(0) != m.extent(1))
        throw std::invalid_argument("normc: square matrix required, got " + shape_string(m));
    const std::size_t n = m.extent(0);
    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sums[j] += m(i, j);
    for (std::size_t j = 0; j < n; ++j)
        if (!(sums[j] > 0.0))
            throw std::invalid_argument("normc: column " + std::to_string(j) +
                                        " has non-positive sum");
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = m(i, j) / sums[j];
    return out;
}

Tensor layer_aggregate(const Tensor& heads) {
    if (heads.rank() != 3 || heads.extent(1) != heads.extent(2))
        throw std::invalid_argument("layer_aggregate: heads×n×n tensor required, got " +
                                    shape_string(heads));
    const std::size_t num_heads = heads.extent(0), n = heads.extent(1);
    Tensor mean({n, n});
    for (std::size_t h = 0; h < num_heads; ++h)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) mean(i, j) += heads(h, i, j);
    const double inv = 1.0 / static_cast<double>(num_heads);
    for (std::size_t i = 0; i < mean.size(); ++i) mean(i) *= inv;
    for (std::size_t i = 0; i < n; ++i) mean(i, i) += 1.0;
    return normc(mean);
}

Tensor rollout(const std::vector<Tensor>& layers) {
    if (layers.empty()) throw std::invalid_argument("rollout: at least one layer required");
    Tensor v = layers.front();
    for (std::size_t l = 1; l < layers.size(); ++l) v = matmul(v, layers[l]);
    return v;
}

Tensor extract_class_row(const Tensor& v) {
    if (v.rank() != 2 || v.extent(0) != v.extent(1))
        throw std::invalid_argument("extract_class_row: square matrix required, got " +
                                    shape_string(v));
    const std::size_t n = v.extent(0) - 1;
    const std::size_t side = static_cast<std::size_t>(std::llround(std::sqrt(double(n))));
    if (n == 0 || side * side != n)
        throw std::invalid_argument("extract_class_row: patch count " + std::to_string(n) +
                                    " is not a perfect square");
    Tensor prior({side, side});
    for (std::size_t t = 0; t < n; ++t) prior(t / side, t % side) = v(0, t + 1);
    return prior;
}

} // namespace did
