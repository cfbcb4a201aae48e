#pragma once

#include <cstdint>
#include <vector>

#include "did/dataset.hpp"
#include "did/pipeline.hpp"
#include "did/tensor.hpp"

namespace did {

struct TrainConfig {
    double base_lr = 0.05;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    std::size_t batch_size = 32;
    std::size_t total_steps = 2000;
    double warmup_fraction = 0.05;
};

// Mean over classes of the stable binary cross-entropy between sigmoid(logit)
// and the 0/1 label.
double bce_loss(const std::vector<double>& logits, const std::vector<std::uint8_t>& labels);

// Analytic gradient of bce_loss(pool(project(features, head)), labels) w.r.t.
// the head kernel: (sigmoid(B_c) - y_c)/C times the spatial mean of channel d.
Tensor head_gradient(const Tensor& features, const Tensor& head,
                     const std::vector<std::uint8_t>& labels);

// Linear warmup to base_lr over ceil(warmup_fraction*total) steps, then
// half-cosine decay to zero at total_steps.
double cosine_lr(std::size_t step, std::size_t total_steps, double warmup_fraction,
                 double base_lr);

// v <- momentum*v + grad + weight_decay*k;  k <- k - lr*v
void sgd_step(Tensor& kernel, Tensor& velocity, const Tensor& grad, double lr, double momentum,
              double weight_decay);

// Mini-batch SGD of the category head over a frozen backbone. Per-example
// loss is the global BCE plus the mean BCE over the current topN local views
// (views are re-localized with the evolving head each step). Deterministic
// for a given seed; the seed also initializes the head, so total_steps = 0
// returns the seeded initial kernel.
Tensor train_head(const std::vector<LabeledImage>& dataset, const BackboneWeights& weights,
                  const TrainConfig& train_cfg, const PipelineConfig& pipeline_cfg,
                  std::uint64_t seed, std::vector<double>* loss_trace = nullptr);

} // namespace did
