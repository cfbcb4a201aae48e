#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace did {

// Dense row-major n-dimensional array of doubles. The single numeric carrier
// for images, token matrices, attention stacks, category maps and kernels.
class Tensor {
public:
    Tensor() = default;

    // Zero-filled tensor of the given shape. Extents must be positive.
    explicit Tensor(std::vector<std::size_t> shape);

    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor full(std::vector<std::size_t> shape, double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_[axis]; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& flat() const { return data_; }

    double& operator()(std::size_t i) { return data_[i]; }
    double operator()(std::size_t i) const { return data_[i]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    // Contiguous view of row i of a rank-2 tensor.
    std::span<double> row(std::size_t i) { return {data_.data() + i * shape_[1], shape_[1]}; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * shape_[1], shape_[1]};
    }

    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool operator==(const Tensor& other) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::string shape_string(const Tensor& t);

// Standard matrix product with deterministic row-major accumulation: for each
// output element the k-terms are summed in ascending order.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& m);

// Row-wise softmax, stabilized by subtracting each row's maximum.
Tensor softmax_rows(const Tensor& m);

// (x - mean) / sqrt(var + eps) * gamma + beta over one vector; biased variance.
std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gamma,
                               std::span<const double> beta, double eps);

// Align-corners bilinear resize of an h×w map. Output (i,j) samples source
// coordinate (i*(h-1)/(out_h-1), j*(w-1)/(out_w-1)); extent-1 axes broadcast.
Tensor bilinear_upsample(const Tensor& map, std::size_t out_h, std::size_t out_w);

// C×h×w -> per-channel spatial mean, length C.
std::vector<double> average_pool_spatial(const Tensor& maps);

} // namespace did
