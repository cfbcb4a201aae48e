#include "did/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace did {

namespace {

std::size_t checked_volume(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) throw std::invalid_argument("Tensor: zero extent in shape");
        n *= e;
    }
    return n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_volume(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_volume(shape_) != data_.size()) {
        std::ostringstream os;
        os << "Tensor: data length " << data_.size() << " does not match shape ";
        os << shape_string(*this);
        throw std::invalid_argument(os.str());
    }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = value;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string shape_string(const Tensor& t) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < t.rank(); ++i) {
        if (i) os << "x";
        os << t.shape()[i];
    }
    os << ")";
    return os.str();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
        throw std::invalid_argument("matmul: incompatible shapes " + shape_string(a) + " and " +
                                    shape_string(b));
    }
    const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
    Tensor out({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    // i-k-j order: cache friendly and, per output element, identical
    // ascending-k accumulation to the naive triple loop.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = pa[i * k + kk];
            const double* brow = pb + kk * n;
            double* orow = po + i * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Tensor transpose(const Tensor& m) {
    if (m.rank() != 2) throw std::invalid_argument("transpose: rank-2 tensor required");
    Tensor out({m.extent(1), m.extent(0)});
    for (std::size_t i = 0; i < m.extent(0); ++i)
        for (std::size_t j = 0; j < m.extent(1); ++j) out(j, i) = m(i, j);
    return out;
}

Tensor softmax_rows(const Tensor& m) {
    if (m.rank() != 2) throw std::invalid_argument("softmax_rows: rank-2 tensor required");
    const std::size_t rows = m.extent(0), cols = m.extent(1);
    Tensor out({rows, cols});
    for (std::size_t i = 0; i < rows; ++i) {
        auto in = m.row(i);
        auto dst = out.row(i);
        double mx = in[0];
        for (double v : in) mx = std::max(mx, v);
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            dst[j] = std::exp(in[j] - mx);
            sum += dst[j];
        }
        for (std::size_t j = 0; j < cols; ++j) dst[j] /= sum;
    }
    return out;
}

std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gamma,
                               std::span<const double> beta, double eps) {
    if (gamma.size() != x.size() || beta.size() != x.size())
        throw std::invalid_argument("layer_norm: parameter length mismatch");
    if (!(eps > 0.0)) throw std::invalid_argument("layer_norm: eps must be > 0");
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) * inv * gamma[i] + beta[i];
    return out;
}

Tensor bilinear_upsample(const Tensor& map, std::size_t out_h, std::size_t out_w) {
    if (map.rank() != 2) throw std::invalid_argument("bilinear_upsample: rank-2 tensor required");
    if (out_h == 0 || out_w == 0)
        throw std::invalid_argument("bilinear_upsample: output extents must be >= 1");
    const std::size_t h = map.extent(0), w = map.extent(1);
    Tensor out({out_h, out_w});
    for (std::size_t i = 0; i < out_h; ++i) {
        const double sy = (out_h > 1 && h > 1)
                              ? static_cast<double>(i) * static_cast<double>(h - 1) /
                                    static_cast<double>(out_h - 1)
                              : 0.0;
        const std::size_t y0 = static_cast<std::size_t>(sy);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t j = 0; j < out_w; ++j) {
            const double sx = (out_w > 1 && w > 1)
                                  ? static_cast<double>(j) * static_cast<double>(w - 1) /
                                        static_cast<double>(out_w - 1)
                                  : 0.0;
            const std::size_t x0 = static_cast<std::size_t>(sx);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - static_cast<double>(x0);
            const double top = map(y0, x0) * (1.0 - fx) + map(y0, x1) * fx;
            const double bot = map(y1, x0) * (1.0 - fx) + map(y1, x1) * fx;
            out(i, j) = top * (1.0 - fy) + bot * fy;
        }
    }
    return out;
}

std::vector<double> average_pool_spatial(const Tensor& maps) {
    if (maps.rank() != 3)
        throw std::invalid_argument("average_pool_spatial: rank-3 tensor required, got " +
                                    shape_string(maps));
    const std::size_t c = maps.extent(0), h = maps.extent(1), w = maps.extent(2);
    const double* p = maps.data();
    std::vector<double> out(c, 0.0);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (std::size_t i = 0; i < h * w; ++i) sum += p[ch * h * w + i];
        out[ch] = sum / static_cast<double>(h * w);
    }
    return out;
}

} // namespace did
