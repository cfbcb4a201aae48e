#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "did/tensor.hpp"

namespace did {

struct ViTConfig {
    std::size_t image_size = 64; // square input, pixels
    std::size_t patch_size = 8;
    std::size_t dim = 32;     // token channels D
    std::size_t layers = 2;   // encoder depth L
    std::size_t heads = 4;    // attention heads
    std::size_t mlp_dim = 64; // FFN hidden width
    std::size_t num_classes = 4;

    std::size_t grid_side() const { return image_size / patch_size; }
    std::size_t num_patches() const { return grid_side() * grid_side(); }
    std::size_t head_dim() const { return dim / heads; }

    // Throws if the patch size does not divide the image or heads do not
    // divide the channel dimension.
    void validate() const;

    bool operator==(const ViTConfig&) const = default;
};

struct LayerWeights {
    Tensor wq, wk, wv; // D×D each
    std::vector<double> bq, bk, bv;
    Tensor wo; // D×D attention output projection
    std::vector<double> bo;
    Tensor fc1; // D×mlp_dim
    std::vector<double> b1;
    Tensor fc2; // mlp_dim×D
    std::vector<double> b2;
    std::vector<double> ln1_gamma, ln1_beta;
    std::vector<double> ln2_gamma, ln2_beta;
};

struct BackboneWeights {
    Tensor patch_projection; // (3·P²)×D
    std::vector<double> class_token;
    Tensor position_embedding; // (N+1)×D
    std::vector<LayerWeights> layers;
};

struct BackboneOutput {
    Tensor patch_tokens;                 // N×D, final layer rows 1..N
    std::vector<double> class_token_out; // final layer row 0
    std::vector<Tensor> attention_stack; // L tensors of shape heads×(N+1)×(N+1)
};

// Cut an H×W×3 image into raster-ordered patches, each flattened channel-last.
Tensor tokenize(const Tensor& image, std::size_t patch_size);

// Row 0 = class token, rows 1..N = projected patches; position embedding
// added to every row.
Tensor embed(const Tensor& patches, const BackboneWeights& w);

// One post-norm encoder block. Returns the transformed tokens and the
// post-softmax per-head attention (heads×(N+1)×(N+1)).
std::pair<Tensor, Tensor> encoder_layer(const Tensor& tokens, const LayerWeights& lw,
                                        std::size_t heads);

BackboneOutput forward(const Tensor& image, const ViTConfig& cfg, const BackboneWeights& w);

// Seeded deterministic init: uniform Glorot-range matrices, zero biases and
// class token, position embedding uniform in [-0.02, 0.02], LN gamma=1 beta=0.
BackboneWeights init_weights(const ViTConfig& cfg, std::uint64_t seed);

// Flat binary format: integer header (magic, version, config) followed by all
// parameters as little-endian doubles in a fixed order. See README.
void save_weights(const ViTConfig& cfg, const BackboneWeights& w, const std::string& path);
std::pair<ViTConfig, BackboneWeights> load_weights(const std::string& path);

} // namespace did
