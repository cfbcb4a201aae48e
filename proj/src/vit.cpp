#include "did/vit.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "binio.hpp"
#include "did/rng.hpp"

namespace did {

namespace {

constexpr std::uint64_t kWeightsMagic = 0x3157444944ULL; // "DIDW1"
constexpr double kLayerNormEps = 1e-6;

void add_row_bias(Tensor& m, const std::vector<double>& bias) {
    if (bias.size() != m.extent(1))
        throw std::invalid_argument("add_row_bias: bias length mismatch");
    for (std::size_t i = 0; i < m.extent(0); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < bias.size(); ++j) r[j] += bias[j];
    }
}

Tensor slice_cols(const Tensor& m, std::size_t c0, std::size_t c1) {
    Tensor out({m.extent(0), c1 - c0});
    for (std::size_t i = 0; i < m.extent(0); ++i)
        for (std::size_t j = c0; j < c1; ++j) out(i, j - c0) = m(i, j);
    return out;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Tensor linear(const Tensor& x, const Tensor& w, const std::vector<double>& b) {
    Tensor out = matmul(x, w);
    add_row_bias(out, b);
    return out;
}

Tensor norm_rows(const Tensor& m, const std::vector<double>& gamma,
                 const std::vector<double>& beta) {
    Tensor out({m.extent(0), m.extent(1)});
    for (std::size_t i = 0; i < m.extent(0); ++i) {
        const std::vector<double> r = layer_norm(m.row(i), gamma, beta, kLayerNormEps);
        for (std::size_t j = 0; j < r.size(); ++j) out(i, j) = r[j];
    }
    return out;
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, double bound) {
    Tensor t({rows, cols});
    for (std::size_t i = 0; i < t.size(); ++i) t(i) = rng.uniform(-bound, bound);
    return t;
}

} // namespace

void ViTConfig::validate() const {
    if (image_size == 0 || patch_size == 0 || dim == 0 || layers == 0 || heads == 0 ||
        mlp_dim == 0 || num_classes == 0)
        throw std::invalid_argument("ViTConfig: all fields must be positive");
    if (image_size % patch_size != 0) {
        std::ostringstream os;
        os << "ViTConfig: patch size " << patch_size << " does not divide image size "
           << image_size;
        throw std::invalid_argument(os.str());
    }
    if (dim % heads != 0)
        throw std::invalid_argument("ViTConfig: heads must divide the channel dimension");
}

Tensor tokenize(const Tensor& image, std::size_t patch_size) {
    if (image.rank() != 3 || image.extent(2) != 3)
        throw std::invalid_argument("tokenize: H×W×3 image required, got " + shape_string(image));
    const std::size_t h = image.extent(0), w = image.extent(1);
    if (patch_size == 0 || h % patch_size != 0 || w % patch_size != 0) {
        std::ostringstream os;
        os << "tokenize: patch size " << patch_size << " does not divide image " << h << "x" << w;
        throw std::invalid_argument(os.str());
    }
    const std::size_t gh = h / patch_size, gw = w / patch_size;
    const std::size_t plen = 3 * patch_size * patch_size;
    Tensor patches({gh * gw, plen});
    for (std::size_t py = 0; py < gh; ++py) {
        for (std::size_t px = 0; px < gw; ++px) {
            auto dst = patches.row(py * gw + px);
            std::size_t idx = 0;
            for (std::size_t dy = 0; dy < patch_size; ++dy)
                for (std::size_t dx = 0; dx < patch_size; ++dx)
                    for (std::size_t c = 0; c < 3; ++c)
                        dst[idx++] = image(py * patch_size + dy, px * patch_size + dx, c);
        }
    }
    return patches;
}

Tensor embed(const Tensor& patches, const BackboneWeights& w) {
    const std::size_t n = patches.extent(0);
    const std::size_t d = w.patch_projection.extent(1);
    if (patches.extent(1) != w.patch_projection.extent(0))
        throw std::invalid_argument("embed: patch length " + shape_string(patches) +
                                    " does not match projection " +
                                    shape_string(w.patch_projection));
    if (w.position_embedding.extent(0) != n + 1 || w.position_embedding.extent(1) != d)
        throw std::invalid_argument("embed: position embedding shape " +
                                    shape_string(w.position_embedding) + " does not match tokens");
    const Tensor projected = matmul(patches, w.patch_projection);
    Tensor tokens({n + 1, d});
    for (std::size_t j = 0; j < d; ++j) tokens(0, j) = w.class_token[j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) tokens(i + 1, j) = projected(i, j);
    for (std::size_t i = 0; i < n + 1; ++i)
        for (std::size_t j = 0; j < d; ++j) tokens(i, j) += w.position_embedding(i, j);
    return tokens;
}

std::pair<Tensor, Tensor> encoder_layer(const Tensor& tokens, const LayerWeights& lw,
                                        std::size_t heads) {
    const std::size_t n = tokens.extent(0);
    const std::size_t d = tokens.extent(1);
    if (d % heads != 0)
        throw std::invalid_argument("encoder_layer: heads must divide channel dimension");
    const std::size_t dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    const Tensor q = linear(tokens, lw.wq, lw.bq);
    const Tensor k = linear(tokens, lw.wk, lw.bk);
    const Tensor v = linear(tokens, lw.wv, lw.bv);

    Tensor attention({heads, n, n});
    Tensor concat({n, d});
    for (std::size_t h = 0; h < heads; ++h) {
        const Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
        const Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
        const Tensor vh = slice_cols(v, h * dh, (h + 1) * dh);
        Tensor logits = matmul(qh, transpose(kh));
        for (std::size_t i = 0; i < logits.size(); ++i) logits(i) *= scale;
        const Tensor attn = softmax_rows(logits);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) attention(h, i, j) = attn(i, j);
        const Tensor headed = matmul(attn, vh);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dh; ++j) concat(i, h * dh + j) = headed(i, j);
    }
    Tensor msa = linear(concat, lw.wo, lw.bo);
    for (std::size_t i = 0; i < msa.size(); ++i) msa(i) += tokens(i);
    const Tensor y = norm_rows(msa, lw.ln1_gamma, lw.ln1_beta);

    Tensor hidden = linear(y, lw.fc1, lw.b1);
    for (std::size_t i = 0; i < hidden.size(); ++i) hidden(i) = gelu(hidden(i));
    Tensor ffn = linear(hidden, lw.fc2, lw.b2);
    for (std::size_t i = 0; i < ffn.size(); ++i) ffn(i) += y(i);
    return {norm_rows(ffn, lw.ln2_gamma, lw.ln2_beta), std::move(attention)};
}

BackboneOutput forward(const Tensor& image, const ViTConfig& cfg, const BackboneWeights& w) {
    cfg.validate();
    if (image.rank() != 3 || image.extent(0) != cfg.image_size ||
        image.extent(1) != cfg.image_size || image.extent(2) != 3)
        throw std::invalid_argument("forward: image shape " + shape_string(image) +
                                    " does not match config");
    if (w.layers.size() != cfg.layers)
        throw std::invalid_argument("forward: weight layer count does not match config");

    Tensor tokens = embed(tokenize(image, cfg.patch_size), w);
    BackboneOutput out;
    out.attention_stack.reserve(cfg.layers);
    for (const LayerWeights& lw : w.layers) {
        auto [next, attn] = encoder_layer(tokens, lw, cfg.heads);
        tokens = std::move(next);
        out.attention_stack.push_back(std::move(attn));
    }
    const std::size_t n = cfg.num_patches(), d = cfg.dim;
    out.patch_tokens = Tensor({n, d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.patch_tokens(i, j) = tokens(i + 1, j);
    out.class_token_out.assign(tokens.row(0).begin(), tokens.row(0).end());
    return out;
}

BackboneWeights init_weights(const ViTConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    const std::size_t d = cfg.dim, plen = 3 * cfg.patch_size * cfg.patch_size;
    const std::size_t n1 = cfg.num_patches() + 1;

    BackboneWeights w;
    w.patch_projection = uniform_matrix(rng, plen, d, glorot_bound(plen, d));
    w.class_token.assign(d, 0.0);
    w.position_embedding = uniform_matrix(rng, n1, d, 0.02);
    w.layers.resize(cfg.layers);
    for (LayerWeights& lw : w.layers) {
        const double attn_bound = glorot_bound(d, d);
        lw.wq = uniform_matrix(rng, d, d, attn_bound);
        lw.wk = uniform_matrix(rng, d, d, attn_bound);
        lw.wv = uniform_matrix(rng, d, d, attn_bound);
        lw.wo = uniform_matrix(rng, d, d, attn_bound);
        lw.fc1 = uniform_matrix(rng, d, cfg.mlp_dim, glorot_bound(d, cfg.mlp_dim));
        lw.fc2 = uniform_matrix(rng, cfg.mlp_dim, d, glorot_bound(cfg.mlp_dim, d));
        lw.bq.assign(d, 0.0);
        lw.bk.assign(d, 0.0);
        lw.bv.assign(d, 0.0);
        lw.bo.assign(d, 0.0);
        lw.b1.assign(cfg.mlp_dim, 0.0);
        lw.b2.assign(d, 0.0);
        lw.ln1_gamma.assign(d, 1.0);
        lw.ln1_beta.assign(d, 0.0);
        lw.ln2_gamma.assign(d, 1.0);
        lw.ln2_beta.assign(d, 0.0);
    }
    return w;
}

void save_weights(const ViTConfig& cfg, const BackboneWeights& w, const std::string& path) {
    std::ofstream os = binio::open_out(path);
    binio::put_u64(os, kWeightsMagic);
    binio::put_u64(os, cfg.image_size);
    binio::put_u64(os, cfg.patch_size);
    binio::put_u64(os, cfg.dim);
    binio::put_u64(os, cfg.layers);
    binio::put_u64(os, cfg.heads);
    binio::put_u64(os, cfg.mlp_dim);
    binio::put_u64(os, cfg.num_classes);
    binio::put_f64s(os, w.patch_projection.data(), w.patch_projection.size());
    binio::put_f64s(os, w.class_token.data(), w.class_token.size());
    binio::put_f64s(os, w.position_embedding.data(), w.position_embedding.size());
    for (const LayerWeights& lw : w.layers) {
        binio::put_f64s(os, lw.wq.data(), lw.wq.size());
        binio::put_f64s(os, lw.bq.data(), lw.bq.size());
        binio::put_f64s(os, lw.wk.data(), lw.wk.size());
        binio::put_f64s(os, lw.bk.data(), lw.bk.size());
        binio::put_f64s(os, lw.wv.data(), lw.wv.size());
        binio::put_f64s(os, lw.bv.data(), lw.bv.size());
        binio::put_f64s(os, lw.wo.data(), lw.wo.size());
        binio::put_f64s(os, lw.bo.data(), lw.bo.size());
        binio::put_f64s(os, lw.fc1.data(), lw.fc1.size());
        binio::put_f64s(os, lw.b1.data(), lw.b1.size());
        binio::put_f64s(os, lw.fc2.data(), lw.fc2.size());
        binio::put_f64s(os, lw.b2.data(), lw.b2.size());
        binio::put_f64s(os, lw.ln1_gamma.data(), lw.ln1_gamma.size());
        binio::put_f64s(os, lw.ln1_beta.data(), lw.ln1_beta.size());
        binio::put_f64s(os, lw.ln2_gamma.data(), lw.ln2_gamma.size());
        binio::put_f64s(os, lw.ln2_beta.data(), lw.ln2_beta.size());
    }
    if (!os) throw std::runtime_error("save_weights: write failed for " + path);
}

std::pair<ViTConfig, BackboneWeights> load_weights(const std::string& path) {
    std::ifstream is = binio::open_in(path);
    if (binio::get_u64(is) != kWeightsMagic)
        throw std::runtime_error("load_weights: bad magic in " + path);
    ViTConfig cfg;
    cfg.image_size = binio::get_u64(is);
    cfg.patch_size = binio::get_u64(is);
    cfg.dim = binio::get_u64(is);
    cfg.layers = binio::get_u64(is);
    cfg.heads = binio::get_u64(is);
    cfg.mlp_dim = binio::get_u64(is);
    cfg.num_classes = binio::get_u64(is);
    cfg.validate();

    const std::size_t d = cfg.dim, plen = 3 * cfg.patch_size * cfg.patch_size;
    BackboneWeights w;
    w.patch_projection = Tensor({plen, d});
    binio::get_f64s(is, w.patch_projection.data(), w.patch_projection.size());
    w.class_token.resize(d);
    binio::get_f64s(is, w.class_token.data(), d);
    w.position_embedding = Tensor({cfg.num_patches() + 1, d});
    binio::get_f64s(is, w.position_embedding.data(), w.position_embedding.size());
    w.layers.resize(cfg.layers);
    for (LayerWeights& lw : w.layers) {
        auto mat = [&](std::size_t r, std::size_t c) {
            Tensor t({r, c});
            binio::get_f64s(is, t.data(), t.size());
            return t;
        };
        auto vec = [&](std::size_t nn) {
            std::vector<double> v(nn);
            binio::get_f64s(is, v.data(), nn);
            return v;
        };
        lw.wq = mat(d, d);
        lw.bq = vec(d);
        lw.wk = mat(d, d);
        lw.bk = vec(d);
        lw.wv = mat(d, d);
        lw.bv = vec(d);
        lw.wo = mat(d, d);
        lw.bo = vec(d);
        lw.fc1 = mat(d, cfg.mlp_dim);
        lw.b1 = vec(cfg.mlp_dim);
        lw.fc2 = mat(cfg.mlp_dim, d);
        lw.b2 = vec(d);
        lw.ln1_gamma = vec(d);
        lw.ln1_beta = vec(d);
        lw.ln2_gamma = vec(d);
        lw.ln2_beta = vec(d);
    }
    return {cfg, std::move(w)};
}

} // namespace did
