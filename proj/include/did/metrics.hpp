#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace did {

enum class MetricMode { kAll, kTop3 };

MetricMode parse_metric_mode(const std::string& name);
std::string to_string(MetricMode mode);

struct MetricsReport {
    double map = 0.0;
    double class_precision = 0.0; // CP
    double class_recall = 0.0;    // CR
    double class_f1 = 0.0;        // CF1
    double overall_precision = 0.0; // OP
    double overall_recall = 0.0;    // OR
    double overall_f1 = 0.0;        // OF1
    MetricMode mode = MetricMode::kAll;
};

// Interpolation-free AP: sort by score descending (ties keep original index
// order), average precision at each positive's rank. Throws without positives.
double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels);

// scores/labels are M images × C classes. Mode all predicts score >= threshold;
// top3 predicts the three highest-scoring classes per image. mAP ignores mode;
// classes with no positive ground truth are excluded from its mean.
MetricsReport compute_metrics(const std::vector<std::vector<double>>& scores,
                              const std::vector<std::vector<std::uint8_t>>& labels,
                              MetricMode mode, double threshold = 0.5);

} // namespace did
