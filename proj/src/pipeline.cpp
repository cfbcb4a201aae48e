#include "did/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "did/rollout.hpp"

namespace did {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

GlobalPass run_backbone(const Tensor& image, const ViTConfig& cfg, const BackboneWeights& w) {
    const BackboneOutput out = forward(image, cfg, w);
    std::vector<Tensor> aggregates;
    aggregates.reserve(out.attention_stack.size());
    for (const Tensor& layer : out.attention_stack) aggregates.push_back(layer_aggregate(layer));
    return {reshape_tokens(out.patch_tokens), extract_class_row(rollout(aggregates))};
}

Tensor crop_resize(const Tensor& image, const BoundingBox& bbox, std::size_t out_size) {
    if (image.rank() != 3 || image.extent(2) != 3)
        throw std::invalid_argument("crop_resize: H×W×3 image required, got " +
                                    shape_string(image));
    if (bbox.x1 < bbox.x0 || bbox.y1 < bbox.y0 || bbox.x1 >= image.extent(1) ||
        bbox.y1 >= image.extent(0))
        throw std::invalid_argument("crop_resize: bbox out of range");
    const std::size_t ch = bbox.height(), cw = bbox.width();
    Tensor out({out_size, out_size, 3});
    Tensor plane({ch, cw});
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t y = 0; y < ch; ++y)
            for (std::size_t x = 0; x < cw; ++x)
                plane(y, x) = image(bbox.y0 + y, bbox.x0 + x, c);
        const Tensor resized = bilinear_upsample(plane, out_size, out_size);
        for (std::size_t y = 0; y < out_size; ++y)
            for (std::size_t x = 0; x < out_size; ++x) out(y, x, c) = resized(y, x);
    }
    return out;
}

std::vector<double> fuse_scores(const std::vector<double>& global_scores,
                                const std::vector<std::vector<double>>& local_scores) {
    std::vector<double> fused = global_scores;
    for (const std::vector<double>& local : local_scores) {
        if (local.size() != fused.size())
            throw std::invalid_argument("fuse_scores: score length mismatch");
        for (std::size_t c = 0; c < fused.size(); ++c) fused[c] = std::max(fused[c], local[c]);
    }
    return fused;
}

PredictionResult predict(const Tensor& image, const BackboneWeights& w, const Tensor& head,
                         const PipelineConfig& cfg) {
    return predict_cached(run_backbone(image, cfg.vit, w), image, w, head, cfg);
}

PredictionResult predict_cached(const GlobalPass& global_pass, const Tensor& image,
                                const BackboneWeights& w, const Tensor& head,
                                const PipelineConfig& cfg) {
    if (head.rank() != 2 || head.extent(0) != cfg.vit.num_classes ||
        head.extent(1) != cfg.vit.dim)
        throw std::invalid_argument("predict: head kernel " + shape_string(head) +
                                    " does not match config");

    const Tensor category_maps = project_categories(global_pass.features, head);
    const std::vector<double> logits = pool_scores(category_maps);

    PredictionResult result;
    result.global_scores.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) result.global_scores[c] = sigmoid(logits[c]);

    const std::vector<std::size_t> selected =
        select_topn(logits, cfg.topn, cfg.order, cfg.select_seed);
    if (selected.empty()) {
        result.fused_scores = result.global_scores;
        return result;
    }

    const std::size_t h = category_maps.extent(1), wd = category_maps.extent(2);
    Tensor selected_maps({selected.size(), h, wd});
    std::vector<double> confidences(selected.size());
    for (std::size_t s = 0; s < selected.size(); ++s) {
        std::copy_n(category_maps.data() + selected[s] * h * wd, h * wd,
                    selected_maps.data() + s * h * wd);
        confidences[s] = sigmoid(logits[selected[s]]);
    }

    const InstanceMaps instance_maps =
        apply_strategy(selected_maps, global_pass.prior, cfg.strategy);
    result.proposals = localize(instance_maps, selected, confidences, cfg.lambda,
                                image.extent(0), image.extent(1));

    result.per_view_scores.reserve(result.proposals.size());
    for (const InstanceProposal& proposal : result.proposals) {
        const Tensor view = crop_resize(image, proposal.bbox, cfg.vit.image_size);
        const BackboneOutput view_out = forward(view, cfg.vit, w);
        const std::vector<double> view_logits =
            pool_scores(project_categories(reshape_tokens(view_out.patch_tokens), head));
        std::vector<double> view_scores(view_logits.size());
        for (std::size_t c = 0; c < view_logits.size(); ++c)
            view_scores[c] = sigmoid(view_logits[c]);
        result.per_view_scores.push_back(std::move(view_scores));
    }
    result.fused_scores = fuse_scores(result.global_scores, result.per_view_scores);
    return result;
}

} // namespace did
