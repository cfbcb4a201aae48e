#pragma once

#include <cstdint>
#include <vector>

#include "did/category.hpp"
#include "did/localization.hpp"
#include "did/reconstraint.hpp"
#include "did/tensor.hpp"
#include "did/vit.hpp"

namespace did {

struct PipelineConfig {
    double lambda = 0.6;
    std::size_t topn = 4;
    Strategy strategy = Strategy::kHadamard;
    SelectOrder order = SelectOrder::kDescending;
    std::uint64_t select_seed = 0; // only used by random selection order
    ViTConfig vit;
};

struct PredictionResult {
    std::vector<double> global_scores; // C sigmoid probabilities from the full image
    std::vector<double> fused_scores;  // elementwise max over global and local views
    std::vector<InstanceProposal> proposals;
    std::vector<std::vector<double>> per_view_scores; // n_sel × C
};

// Head-independent outputs of one backbone pass: reshaped patch features and
// the rollout prior. Reusable across head updates since the backbone is frozen.
struct GlobalPass {
    Tensor features; // D×h×w
    Tensor prior;    // h×w
};

GlobalPass run_backbone(const Tensor& image, const ViTConfig& cfg, const BackboneWeights& w);

// Crop the inclusive bbox region and bilinearly resize to out_size×out_size.
Tensor crop_resize(const Tensor& image, const BoundingBox& bbox, std::size_t out_size);

// Elementwise maximum over the global vector and every local vector.
std::vector<double> fuse_scores(const std::vector<double>& global_scores,
                                const std::vector<std::vector<double>>& local_scores);

double sigmoid(double x);

// Full multi-view pass: global forward, category maps, rollout re-constraint,
// localization, crop-and-refeed, score fusion.
PredictionResult predict(const Tensor& image, const BackboneWeights& w, const Tensor& head,
                         const PipelineConfig& cfg);

// Same, reusing a cached backbone pass for the global view.
PredictionResult predict_cached(const GlobalPass& global_pass, const Tensor& image,
                                const BackboneWeights& w, const Tensor& head,
                                const PipelineConfig& cfg);

} // namespace did
