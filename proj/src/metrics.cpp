#include "did/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace did {

MetricMode parse_metric_mode(const std::string& name) {
    if (name == "all") return MetricMode::kAll;
    if (name == "top3") return MetricMode::kTop3;
    throw std::invalid_argument("unknown metric mode: " + name);
}

std::string to_string(MetricMode mode) { return mode == MetricMode::kAll ? "all" : "top3"; }

double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("average_precision: scores/labels length mismatch");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    if (hits == 0) throw std::invalid_argument("average_precision: no positive labels");
    return sum / static_cast<double>(hits);
}

namespace {

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1(double p, double r) { return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

} // namespace

MetricsReport compute_metrics(const std::vector<std::vector<double>>& scores,
                              const std::vector<std::vector<std::uint8_t>>& labels,
                              MetricMode mode, double threshold) {
    if (scores.empty() || scores.size() != labels.size())
        throw std::invalid_argument("compute_metrics: scores/labels shape mismatch");
    const std::size_t m = scores.size(), c = scores.front().size();
    for (std::size_t i = 0; i < m; ++i)
        if (scores[i].size() != c || labels[i].size() != c)
            throw std::invalid_argument("compute_metrics: ragged rows");

    // Decision matrix.
    std::vector<std::vector<std::uint8_t>> pred(m, std::vector<std::uint8_t>(c, 0));
    if (mode == MetricMode::kAll) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < c; ++j) pred[i][j] = scores[i][j] >= threshold ? 1 : 0;
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<std::size_t> order(c);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return scores[i][a] > scores[i][b];
            });
            for (std::size_t k = 0; k < std::min<std::size_t>(3, c); ++k) pred[i][order[k]] = 1;
        }
    }

    std::vector<std::size_t> tp(c, 0), predicted(c, 0), positive(c, 0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            predicted[j] += pred[i][j];
            positive[j] += labels[i][j];
            tp[j] += (pred[i][j] && labels[i][j]) ? 1 : 0;
        }
    }

    MetricsReport report;
    report.mode = mode;
    double cp = 0.0, cr = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        cp += safe_div(double(tp[j]), double(predicted[j]));
        cr += safe_div(double(tp[j]), double(positive[j]));
    }
    report.class_precision = cp / double(c);
    report.class_recall = cr / double(c);
    report.class_f1 = f1(report.class_precision, report.class_recall);

    const double total_tp = double(std::accumulate(tp.begin(), tp.end(), std::size_t{0}));
    const double total_pred =
        double(std::accumulate(predicted.begin(), predicted.end(), std::size_t{0}));
    const double total_pos =
        double(std::accumulate(positive.begin(), positive.end(), std::size_t{0}));
    report.overall_precision = safe_div(total_tp, total_pred);
    report.overall_recall = safe_div(total_tp, total_pos);
    report.overall_f1 = f1(report.overall_precision, report.overall_recall);

    double ap_sum = 0.0;
    std::size_t ap_classes = 0;
    std::vector<double> column(m);
    std::vector<std::uint8_t> column_labels(m);
    for (std::size_t j = 0; j < c; ++j) {
        if (positive[j] == 0) continue;
        for (std::size_t i = 0; i < m; ++i) {
            column[i] = scores[i][j];
            column_labels[i] = labels[i][j];
        }
        ap_sum += average_precision(column, column_labels);
        ++ap_classes;
    }
    report.map = ap_classes ? ap_sum / double(ap_classes) : 0.0;
    return report;
}

} // namespace did
