#pragma once

#include <string>
#include <vector>

#include "did/dataset.hpp"
#include "did/metrics.hpp"
#include "did/pipeline.hpp"

namespace did {

// Multi-view predictions for every image (order-stable, parallel per image).
std::vector<PredictionResult> predict_batch(const std::vector<LabeledImage>& data,
                                            const BackboneWeights& weights, const Tensor& head,
                                            const PipelineConfig& cfg);

// Metrics of the fused (use_fused) or global-only scores over a dataset.
MetricsReport evaluate_pipeline(const std::vector<LabeledImage>& data,
                                const BackboneWeights& weights, const Tensor& head,
                                const PipelineConfig& cfg, MetricMode mode,
                                bool use_fused = true);

enum class AblationAxis { kLambda, kTopN, kStrategy, kOrder };

AblationAxis parse_ablation_axis(const std::string& name);

struct AblationRow {
    std::string axis_value;
    MetricsReport report;
};

// One evaluation per grid point. grid is "start:end:step" for the numeric
// axes and ignored for strategy/order, which enumerate their fixed sets
// (strategy additionally includes the topN=0 baseline row).
std::vector<AblationRow> run_ablation(AblationAxis axis, const std::string& grid,
                                      const std::vector<LabeledImage>& data,
                                      const BackboneWeights& weights, const Tensor& head,
                                      const PipelineConfig& base_cfg, MetricMode mode);

// Header line plus one "axis_value,mAP,OF1,CF1" row per grid point.
std::string ablation_csv(const std::vector<AblationRow>& rows);

} // namespace did
