#include "did/training.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "did/parallel.hpp"
#include "did/rng.hpp"

namespace did {

double bce_loss(const std::vector<double>& logits, const std::vector<std::uint8_t>& labels) {
    if (logits.size() != labels.size())
        throw std::invalid_argument("bce_loss: logits/labels length mismatch");
    if (logits.empty()) throw std::invalid_argument("bce_loss: empty input");
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        const double z = logits[c];
        const double y = labels[c] ? 1.0 : 0.0;
        // max(z,0) - z*y + log(1+exp(-|z|))
        sum += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
    return sum / static_cast<double>(logits.size());
}

namespace {

std::vector<double> channel_means(const Tensor& features) {
    return average_pool_spatial(features);
}

std::vector<double> head_logits(const Tensor& head, const std::vector<double>& means) {
    const std::size_t c = head.extent(0), d = head.extent(1);
    std::vector<double> logits(c, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
        double b = 0.0;
        for (std::size_t j = 0; j < d; ++j) b += head(i, j) * means[j];
        logits[i] = b;
    }
    return logits;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// grad_cd += scale * (sigmoid(B_c) - y_c)/C * m_d
void accumulate_bce_gradient(Tensor& grad, const std::vector<double>& logits,
                             const std::vector<std::uint8_t>& labels,
                             const std::vector<double>& means, double scale) {
    const std::size_t c = grad.extent(0), d = grad.extent(1);
    const double inv_c = 1.0 / static_cast<double>(c);
    for (std::size_t i = 0; i < c; ++i) {
        const double delta =
            scale * (stable_sigmoid(logits[i]) - (labels[i] ? 1.0 : 0.0)) * inv_c;
        for (std::size_t j = 0; j < d; ++j) grad(i, j) += delta * means[j];
    }
}

} // namespace

Tensor head_gradient(const Tensor& features, const Tensor& head,
                     const std::vector<std::uint8_t>& labels) {
    if (features.rank() != 3 || head.rank() != 2 || head.extent(1) != features.extent(0))
        throw std::invalid_argument("head_gradient: head " + shape_string(head) +
                                    " does not match features " + shape_string(features));
    if (labels.size() != head.extent(0))
        throw std::invalid_argument("head_gradient: label count does not match head");
    const std::vector<double> means = channel_means(features);
    Tensor grad({head.extent(0), head.extent(1)});
    accumulate_bce_gradient(grad, head_logits(head, means), labels, means, 1.0);
    return grad;
}

double cosine_lr(std::size_t step, std::size_t total_steps, double warmup_fraction,
                 double base_lr) {
    if (step > total_steps) throw std::invalid_argument("cosine_lr: step beyond total_steps");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
        throw std::invalid_argument("cosine_lr: warmup_fraction must lie in [0,1)");
    const std::size_t warmup = static_cast<std::size_t>(
        std::ceil(warmup_fraction * static_cast<double>(total_steps)));
    if (warmup > 0 && step <= warmup)
        return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
    if (total_steps == warmup) return base_lr;
    const double t = static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void sgd_step(Tensor& kernel, Tensor& velocity, const Tensor& grad, double lr, double momentum,
              double weight_decay) {
    if (!kernel.same_shape(velocity) || !kernel.same_shape(grad))
        throw std::invalid_argument("sgd_step: kernel/velocity/gradient shape mismatch");
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        velocity(i) = momentum * velocity(i) + grad(i) + weight_decay * kernel(i);
        kernel(i) -= lr * velocity(i);
    }
}

namespace {

struct FrozenExample {
    GlobalPass pass;
    std::vector<double> means; // per-channel spatial means of pass.features
};

// Gradient and loss of one example under the current head: global BCE plus
// the mean BCE over the localized views.
double example_gradient(const LabeledImage& example, const FrozenExample& frozen,
                        const BackboneWeights& weights, const Tensor& head,
                        const PipelineConfig& cfg, Tensor& grad) {
    const std::vector<double> global_logits = head_logits(head, frozen.means);
    accumulate_bce_gradient(grad, global_logits, example.labels, frozen.means, 1.0);
    double loss = bce_loss(global_logits, example.labels);

    const std::vector<std::size_t> selected =
        select_topn(global_logits, cfg.topn, cfg.order, cfg.select_seed);
    if (selected.empty()) return loss;

    Tensor sub_kernel({selected.size(), head.extent(1)});
    std::vector<double> confidences(selected.size());
    for (std::size_t s = 0; s < selected.size(); ++s) {
        for (std::size_t j = 0; j < head.extent(1); ++j)
            sub_kernel(s, j) = head(selected[s], j);
        confidences[s] = stable_sigmoid(global_logits[selected[s]]);
    }
    const InstanceMaps maps = apply_strategy(project_categories(frozen.pass.features, sub_kernel),
                                             frozen.pass.prior, cfg.strategy);
    const std::vector<InstanceProposal> proposals =
        localize(maps, selected, confidences, cfg.lambda, example.image.extent(0),
                 example.image.extent(1));

    const double view_scale = 1.0 / static_cast<double>(proposals.size());
    double view_loss = 0.0;
    for (const InstanceProposal& proposal : proposals) {
        const Tensor view = crop_resize(example.image, proposal.bbox, cfg.vit.image_size);
        const BackboneOutput out = forward(view, cfg.vit, weights);
        const std::vector<double> view_means =
            channel_means(reshape_tokens(out.patch_tokens));
        const std::vector<double> view_logits = head_logits(head, view_means);
        accumulate_bce_gradient(grad, view_logits, example.labels, view_means, view_scale);
        view_loss += bce_loss(view_logits, example.labels);
    }
    return loss + view_scale * view_loss;
}

} // namespace

Tensor train_head(const std::vector<LabeledImage>& dataset, const BackboneWeights& weights,
                  const TrainConfig& train_cfg, const PipelineConfig& pipeline_cfg,
                  std::uint64_t seed, std::vector<double>* loss_trace) {
    if (dataset.empty()) throw std::invalid_argument("train_head: empty dataset");
    if (!(train_cfg.base_lr > 0.0)) throw std::invalid_argument("train_head: base_lr must be > 0");
    if (!(train_cfg.warmup_fraction >= 0.0 && train_cfg.warmup_fraction < 1.0))
        throw std::invalid_argument("train_head: warmup_fraction must lie in [0,1)");
    pipeline_cfg.vit.validate();
    const std::size_t num_classes = pipeline_cfg.vit.num_classes;
    for (const LabeledImage& example : dataset)
        if (example.labels.size() != num_classes)
            throw std::invalid_argument("train_head: label width does not match num_classes");

    Tensor head = init_head(num_classes, pipeline_cfg.vit.dim, seed);
    if (train_cfg.total_steps == 0) return head;

    // The backbone is frozen: features, priors and channel means per image
    // never change across steps.
    std::vector<FrozenExample> frozen(dataset.size());
    parallel_for(dataset.size(), [&](std::size_t i) {
        GlobalPass pass = run_backbone(dataset[i].image, pipeline_cfg.vit, weights);
        std::vector<double> means = channel_means(pass.features);
        frozen[i] = {std::move(pass), std::move(means)};
    });

    Tensor velocity({num_classes, pipeline_cfg.vit.dim});
    Rng shuffle_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> perm(dataset.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::size_t cursor = perm.size(); // forces an initial shuffle

    const std::size_t batch = std::max<std::size_t>(1, train_cfg.batch_size);
    std::vector<Tensor> slot_grads(batch);
    std::vector<double> slot_losses(batch);
    std::vector<std::size_t> batch_indices(batch);

    for (std::size_t step = 1; step <= train_cfg.total_steps; ++step) {
        for (std::size_t b = 0; b < batch; ++b) {
            if (cursor >= perm.size()) {
                for (std::size_t i = perm.size(); i > 1; --i)
                    std::swap(perm[i - 1], perm[shuffle_rng.index(i)]);
                cursor = 0;
            }
            batch_indices[b] = perm[cursor++];
        }

        parallel_for(batch, [&](std::size_t b) {
            const std::size_t idx = batch_indices[b];
            slot_grads[b] = Tensor({num_classes, pipeline_cfg.vit.dim});
            slot_losses[b] = example_gradient(dataset[idx], frozen[idx], weights, head,
                                              pipeline_cfg, slot_grads[b]);
        });

        Tensor grad({num_classes, pipeline_cfg.vit.dim});
        double loss = 0.0;
        for (std::size_t b = 0; b < batch; ++b) { // index order keeps runs bit-identical
            for (std::size_t i = 0; i < grad.size(); ++i) grad(i) += slot_grads[b](i);
            loss += slot_losses[b];
        }
        const double inv_batch = 1.0 / static_cast<double>(batch);
        for (std::size_t i = 0; i < grad.size(); ++i) grad(i) *= inv_batch;
        loss *= inv_batch;

        const double lr = cosine_lr(step, train_cfg.total_steps, train_cfg.warmup_fraction,
                                    train_cfg.base_lr);
        sgd_step(head, velocity, grad, lr, train_cfg.momentum, train_cfg.weight_decay);
        if (loss_trace) loss_trace->push_back(loss);
    }
    return head;
}

} // namespace did
