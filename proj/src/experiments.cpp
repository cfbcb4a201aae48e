#include "did/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "did/parallel.hpp"

namespace did {

std::vector<PredictionResult> predict_batch(const std::vector<LabeledImage>& data,
                                            const BackboneWeights& weights, const Tensor& head,
                                            const PipelineConfig& cfg) {
    std::vector<PredictionResult> results(data.size());
    parallel_for(data.size(), [&](std::size_t i) {
        results[i] = predict(data[i].image, weights, head, cfg);
    });
    return results;
}

MetricsReport evaluate_pipeline(const std::vector<LabeledImage>& data,
                                const BackboneWeights& weights, const Tensor& head,
                                const PipelineConfig& cfg, MetricMode mode, bool use_fused) {
    const std::vector<PredictionResult> results = predict_batch(data, weights, head, cfg);
    std::vector<std::vector<double>> scores(data.size());
    std::vector<std::vector<std::uint8_t>> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        scores[i] = use_fused ? results[i].fused_scores : results[i].global_scores;
        labels[i] = data[i].labels;
    }
    return compute_metrics(scores, labels, mode);
}

AblationAxis parse_ablation_axis(const std::string& name) {
    if (name == "lambda") return AblationAxis::kLambda;
    if (name == "topn") return AblationAxis::kTopN;
    if (name == "strategy") return AblationAxis::kStrategy;
    if (name == "order") return AblationAxis::kOrder;
    throw std::invalid_argument("unknown ablation axis: " + name);
}

namespace {

std::vector<double> parse_grid(const std::string& grid) {
    double start = 0.0, end = 0.0, step = 0.0;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%lf", &start, &end, &step) != 3 || step <= 0.0)
        throw std::invalid_argument("bad grid spec '" + grid + "' (want start:end:step)");
    std::vector<double> values;
    // Inclusive end, with slack for accumulated rounding.
    for (double v = start; v <= end + step * 1e-9; v += step) values.push_back(v);
    if (values.empty()) throw std::invalid_argument("empty grid '" + grid + "'");
    return values;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace

std::vector<AblationRow> run_ablation(AblationAxis axis, const std::string& grid,
                                      const std::vector<LabeledImage>& data,
                                      const BackboneWeights& weights, const Tensor& head,
                                      const PipelineConfig& base_cfg, MetricMode mode) {
    std::vector<AblationRow> rows;
    auto evaluate = [&](const PipelineConfig& cfg, const std::string& label) {
        rows.push_back({label, evaluate_pipeline(data, weights, head, cfg, mode)});
    };

    switch (axis) {
    case AblationAxis::kLambda: {
        const std::string effective = grid.empty() ? "0.2:0.8:0.1" : grid;
        for (double v : parse_grid(effective)) {
            PipelineConfig cfg = base_cfg;
            cfg.lambda = v;
            evaluate(cfg, format_value(v));
        }
        break;
    }
    case AblationAxis::kTopN: {
        if (grid.empty()) {
            for (std::size_t n : {0, 1, 2, 4, 6, 8}) {
                PipelineConfig cfg = base_cfg;
                cfg.topn = n;
                evaluate(cfg, std::to_string(n));
            }
        } else {
            for (double v : parse_grid(grid)) {
                PipelineConfig cfg = base_cfg;
                cfg.topn = static_cast<std::size_t>(std::llround(v));
                evaluate(cfg, std::to_string(cfg.topn));
            }
        }
        break;
    }
    case AblationAxis::kStrategy: {
        PipelineConfig baseline = base_cfg;
        baseline.topn = 0;
        evaluate(baseline, "baseline");
        for (Strategy s : {Strategy::kHadamard, Strategy::kSum, Strategy::kIdentity}) {
            PipelineConfig cfg = base_cfg;
            cfg.strategy = s;
            evaluate(cfg, to_string(s));
        }
        break;
    }
    case AblationAxis::kOrder: {
        for (SelectOrder o :
             {SelectOrder::kDescending, SelectOrder::kAscending, SelectOrder::kRandom}) {
            PipelineConfig cfg = base_cfg;
            cfg.order = o;
            evaluate(cfg, to_string(o));
        }
        break;
    }
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string csv = "axis_value,mAP,OF1,CF1\n";
    char buf[128];
    for (const AblationRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", row.axis_value.c_str(),
                      row.report.map, row.report.overall_f1, row.report.class_f1);
        csv += buf;
    }
    return csv;
}

} // namespace did
