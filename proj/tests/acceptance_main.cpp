// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 7 trains the head at desk scale and dominates runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "did/cli.hpp"
#include "did/dataset.hpp"
#include "did/experiments.hpp"
#include "did/localization.hpp"
#include "did/metrics.hpp"
#include "did/pipeline.hpp"
#include "did/rng.hpp"
#include "did/rollout.hpp"
#include "did/training.hpp"

using namespace did;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

Tensor random_stochastic_heads(Rng& rng, std::size_t heads, std::size_t n) {
    Tensor out({heads, n, n});
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            std::vector<double> row(n);
            for (std::size_t j = 0; j < n; ++j) {
                row[j] = std::exp(rng.uniform(-4.0, 4.0));
                sum += row[j];
            }
            for (std::size_t j = 0; j < n; ++j) out(h, i, j) = row[j] / sum;
        }
    return out;
}

ViTConfig toy_vit() {
    ViTConfig cfg;
    cfg.image_size = 64;
    cfg.patch_size = 8;
    cfg.dim = 32;
    cfg.layers = 2;
    cfg.heads = 4;
    cfg.mlp_dim = 64;
    cfg.num_classes = 4;
    return cfg;
}

// ---------------------------------------------------------------------------

void criterion_1_rollout_stochasticity() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t depth = 1 + rng.index(4);
        const std::size_t n = 2 + rng.index(63); // N <= 64 patches plus class token
        std::vector<Tensor> layers;
        for (std::size_t l = 0; l < depth; ++l)
            layers.push_back(layer_aggregate(random_stochastic_heads(rng, 1 + rng.index(4), n)));
        const Tensor v = rollout(layers);
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += v(i, j);
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    }
    const double elapsed = seconds_since(start);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "max |column sum - 1| = %.3g, %.2fs", worst, elapsed);
    report(1, "rollout columns sum to 1 within 1e-9 on 100 random stacks",
           worst < 1e-9 && elapsed < 5.0, detail);
}

void criterion_2_component_oracle() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(1002);
    bool all_match = true;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t h = 1 + rng.index(32), w = 1 + rng.index(32);
        Mask mask{h, w, std::vector<std::uint8_t>(h * w, 0)};
        bool any = false;
        for (auto& v : mask.fg) {
            v = rng.uniform() < 0.45 ? 1 : 0;
            any = any || v;
        }
        if (!any) mask.fg[rng.index(h * w)] = 1;

        // independent flood-fill oracle
        std::vector<int> seen(h * w, 0);
        BoundingBox best_box;
        std::size_t best_size = 0;
        for (std::size_t s = 0; s < h * w; ++s) {
            if (!mask.fg[s] || seen[s]) continue;
            std::vector<std::size_t> stack{s};
            seen[s] = 1;
            BoundingBox box{s % w, s / w, s % w, s / w};
            std::size_t size = 0;
            while (!stack.empty()) {
                const std::size_t p = stack.back();
                stack.pop_back();
                ++size;
                const std::size_t y = p / w, x = p % w;
                box.x0 = std::min(box.x0, x);
                box.x1 = std::max(box.x1, x);
                box.y0 = std::min(box.y0, y);
                box.y1 = std::max(box.y1, y);
                const long moves[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
                for (const auto& mv : moves) {
                    const long ny = long(y) + mv[0], nx = long(x) + mv[1];
                    if (ny < 0 || nx < 0 || ny >= long(h) || nx >= long(w)) continue;
                    const std::size_t q = std::size_t(ny) * w + std::size_t(nx);
                    if (mask.fg[q] && !seen[q]) {
                        seen[q] = 1;
                        stack.push_back(q);
                    }
                }
            }
            if (size > best_size) {
                best_size = size;
                best_box = box;
            }
        }
        all_match = all_match && (largest_component_bbox(mask) == best_box);
    }
    const double elapsed = seconds_since(start);
    char detail[64];
    std::snprintf(detail, sizeof(detail), "200 masks, %.2fs", elapsed);
    report(2, "largest_component_bbox matches the flood-fill oracle exactly",
           all_match && elapsed < 2.0, detail);
}

void criterion_3_gradient_check() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(1003);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng.index(16), c = 1 + rng.index(8), side = 1 + rng.index(8);
        Tensor features({d, side, side});
        for (std::size_t i = 0; i < features.size(); ++i) features(i) = rng.uniform(-2.0, 2.0);
        Tensor head({c, d});
        for (std::size_t i = 0; i < head.size(); ++i) head(i) = rng.uniform(-1.0, 1.0);
        std::vector<std::uint8_t> labels(c);
        for (auto& l : labels) l = rng.uniform() < 0.5 ? 1 : 0;

        const Tensor analytic = head_gradient(features, head, labels);
        const double eps = 1e-5;
        double num = 0.0, den = 0.0;
        Tensor probe = head;
        for (std::size_t i = 0; i < head.size(); ++i) {
            probe(i) = head(i) + eps;
            const double up = bce_loss(pool_scores(project_categories(features, probe)), labels);
            probe(i) = head(i) - eps;
            const double down =
                bce_loss(pool_scores(project_categories(features, probe)), labels);
            probe(i) = head(i);
            const double fd = (up - down) / (2.0 * eps);
            num += (analytic(i) - fd) * (analytic(i) - fd);
            den += analytic(i) * analytic(i);
        }
        worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-12));
    }
    const double elapsed = seconds_since(start);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max relative error = %.3g, %.2fs", worst, elapsed);
    report(3, "head_gradient matches central finite differences within 1e-6",
           worst < 1e-6 && elapsed < 5.0, detail);
}

void criterion_4_baseline_identity() {
    PipelineConfig cfg;
    cfg.vit = toy_vit();
    cfg.topn = 0;
    const BackboneWeights weights = init_weights(cfg.vit, 404);
    const Tensor head = init_head(cfg.vit.num_classes, cfg.vit.dim, 405);
    const auto samples = generate_synthetic(406, 20, cfg.vit.image_size);
    bool identical = true;
    for (const auto& sample : samples) {
        const PredictionResult r = predict(sample.item.image, weights, head, cfg);
        identical = identical && (r.fused_scores == r.global_scores) && r.proposals.empty();
    }
    report(4, "topN=0 fused scores are bit-identical to global scores on 20 images", identical,
           "");
}

void criterion_5_strategy_identities() {
    Rng rng(1005);
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.index(4), side = 2 + rng.index(7);
        Tensor maps({n, side, side});
        for (std::size_t i = 0; i < maps.size(); ++i) maps(i) = rng.uniform(-3.0, 3.0);
        const Tensor ones = Tensor::full({side, side}, 1.0);
        const Tensor zeros({side, side});
        const Tensor identity_out = apply_strategy(maps, ones, Strategy::kIdentity).maps;
        ok = ok && (apply_strategy(maps, ones, Strategy::kHadamard).maps == identity_out);
        ok = ok && (apply_strategy(maps, zeros, Strategy::kSum).maps == identity_out);
        ok = ok && (identity_out == maps);
    }
    report(5, "hadamard(V'=1) and sum(V'=0) reproduce the identity strategy bit-exactly", ok,
           "");
}

void criterion_6_lambda_monotonicity() {
    PipelineConfig cfg;
    cfg.vit = toy_vit();
    const BackboneWeights weights = init_weights(cfg.vit, 606);
    const Tensor head = init_head(cfg.vit.num_classes, cfg.vit.dim, 607);
    const auto samples = generate_synthetic(608, 20, cfg.vit.image_size);
    bool monotone = true;
    for (const auto& sample : samples) {
        const GlobalPass pass = run_backbone(sample.item.image, cfg.vit, weights);
        const Tensor category_maps = project_categories(pass.features, head);
        const std::vector<double> scores = pool_scores(category_maps);
        const auto selected = select_topn(scores, cfg.topn, SelectOrder::kDescending, 0);
        const std::size_t hw = category_maps.extent(1) * category_maps.extent(2);
        Tensor sel({selected.size(), category_maps.extent(1), category_maps.extent(2)});
        for (std::size_t s = 0; s < selected.size(); ++s)
            std::copy_n(category_maps.data() + selected[s] * hw, hw, sel.data() + s * hw);
        const InstanceMaps inst = apply_strategy(sel, pass.prior, Strategy::kHadamard);

        for (std::size_t s = 0; s < selected.size(); ++s) {
            Tensor map({category_maps.extent(1), category_maps.extent(2)});
            std::copy_n(inst.maps.data() + s * hw, hw, map.data());
            const Tensor up = upsample_map(map, cfg.vit.image_size, cfg.vit.image_size);
            std::size_t previous = up.size() + 1;
            for (double lambda : {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
                const std::size_t count = threshold_mask(up, lambda).count();
                monotone = monotone && (count <= previous);
                previous = count;
            }
        }
    }
    report(6, "foreground counts are non-increasing in lambda over a 20-image batch", monotone,
           "");
}

void criterion_7_desk_scale_learning() {
    const auto start = std::chrono::steady_clock::now();
    PipelineConfig cfg;
    cfg.vit = toy_vit();
    cfg.lambda = 0.6;
    cfg.topn = 2;

    const auto samples = generate_synthetic(1, 2000, 64);
    std::vector<LabeledImage> train_set, val_set;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (i < 1600 ? train_set : val_set).push_back(samples[i].item);

    const BackboneWeights weights = init_weights(cfg.vit, 7001);
    TrainConfig tcfg; // defaults: lr 0.05, momentum 0.9, wd 1e-5, batch 32, 5% warmup
    tcfg.total_steps = 2000;

    const Tensor untrained = init_head(cfg.vit.num_classes, cfg.vit.dim, 7002);
    const MetricsReport before =
        evaluate_pipeline(val_set, weights, untrained, cfg, MetricMode::kAll, false);

    const Tensor trained = train_head(train_set, weights, tcfg, cfg, 7002);
    const MetricsReport single =
        evaluate_pipeline(val_set, weights, trained, cfg, MetricMode::kAll, false);
    const MetricsReport fused =
        evaluate_pipeline(val_set, weights, trained, cfg, MetricMode::kAll, true);

    const double gain = single.map - before.map;
    const double elapsed = seconds_since(start);
    char detail[192];
    std::snprintf(detail, sizeof(detail),
                  "untrained mAP %.4f, trained %.4f (gain %.4f), fused %.4f, %.0fs",
                  before.map, single.map, gain, fused.map, elapsed);
    report(7, "2000-step training gains >= 0.30 mAP and fusion does not degrade",
           gain >= 0.30 && fused.map >= single.map - 0.01 && elapsed < 900.0, detail);
}

void criterion_8_metrics_oracle() {
    bool ok = true;

    const std::vector<std::vector<double>> scores{{0.9, 0.6, 0.2}, {0.1, 0.8, 0.7}};
    const std::vector<std::vector<std::uint8_t>> labels{{1, 0, 1}, {0, 1, 1}};
    const MetricsReport all = compute_metrics(scores, labels, MetricMode::kAll);
    auto near_eq = [](double a, double b) { return std::abs(a - b) < 1e-12; };
    ok = ok && near_eq(all.class_precision, (1.0 + 0.5 + 1.0) / 3.0);
    ok = ok && near_eq(all.class_recall, (1.0 + 1.0 + 0.5) / 3.0);
    ok = ok && near_eq(all.class_f1, 5.0 / 6.0);
    ok = ok && near_eq(all.overall_precision, 0.75);
    ok = ok && near_eq(all.overall_recall, 0.75);
    ok = ok && near_eq(all.overall_f1, 0.75);
    ok = ok && near_eq(all.map, 1.0);
    ok = ok && near_eq(average_precision({0.9, 0.8, 0.7}, {1, 0, 1}), 5.0 / 6.0);

    Rng rng(1008);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + rng.index(10), c = 2 + rng.index(6);
        std::vector<std::vector<double>> s(m, std::vector<double>(c));
        std::vector<std::vector<std::uint8_t>> l(m, std::vector<std::uint8_t>(c, 0));
        for (std::size_t i = 0; i < m; ++i) {
            for (auto& v : s[i]) v = rng.uniform();
            l[i][rng.index(c)] = 1;
        }
        const MetricsReport r =
            compute_metrics(s, l, trial % 2 ? MetricMode::kAll : MetricMode::kTop3);
        if (r.class_precision + r.class_recall > 0.0)
            ok = ok && std::abs(r.class_f1 - 2.0 * r.class_precision * r.class_recall /
                                                 (r.class_precision + r.class_recall)) < 1e-12;
        if (r.overall_precision + r.overall_recall > 0.0)
            ok = ok &&
                 std::abs(r.overall_f1 - 2.0 * r.overall_precision * r.overall_recall /
                                             (r.overall_precision + r.overall_recall)) < 1e-12;
    }
    report(8, "metrics match hand enumeration and the F1 harmonic identity", ok, "");
}

void criterion_9_cli_determinism() {
    const fs::path dir = "acceptance_cli_tmp";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto at = [&](const std::string& name) { return (dir / name).string(); };
    auto slurp = [](const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is),
                           std::istreambuf_iterator<char>());
    };
    const std::vector<std::string> vit = {"--image-size", "32", "--patch-size", "8",
                                          "--dim",        "16", "--layers",     "1",
                                          "--heads",      "2",  "--mlp-dim",    "32",
                                          "--classes",    "4"};
    auto with_vit = [&](std::vector<std::string> args) {
        args.insert(args.end(), vit.begin(), vit.end());
        return args;
    };

    bool ok = true;
    for (const char* tag : {"a", "b"}) {
        const std::string t(tag);
        ok = ok && run_cli(with_vit({"init-weights", "--seed", "11", "--out",
                                     at("w_" + t + ".bin")})) == 0;
        ok = ok && run_cli({"gen-data", "--seed", "12", "--count", "6", "--size", "32",
                            "--out", at("data_" + t)}) == 0;
        ok = ok && run_cli({"train", "--dataset", at("data_" + t), "--weights",
                            at("w_" + t + ".bin"), "--head-out", at("h_" + t + ".bin"),
                            "--steps", "4", "--batch-size", "4", "--seed", "13", "--topn",
                            "1"}) == 0;
        ok = ok && run_cli({"predict", "--image", at("data_" + t) + "/img_00000.ppm",
                            "--weights", at("w_" + t + ".bin"), "--head",
                            at("h_" + t + ".bin"), "--out", at("p_" + t + ".json"), "--topn",
                            "2"}) == 0;
    }
    ok = ok && slurp(at("w_a.bin")) == slurp(at("w_b.bin"));
    ok = ok && slurp(at("h_a.bin")) == slurp(at("h_b.bin"));
    ok = ok && slurp(at("p_a.json")) == slurp(at("p_b.json"));
    ok = ok && !slurp(at("p_a.json")).empty();
    for (int i = 0; i < 6; ++i) {
        const std::string name = "/img_0000" + std::to_string(i) + ".ppm";
        ok = ok && slurp(at("data_a") + name) == slurp(at("data_b") + name);
    }
    ok = ok && slurp(at("data_a") + "/labels.txt") == slurp(at("data_b") + "/labels.txt");
    fs::remove_all(dir);
    report(9, "init-weights, gen-data, train and predict are byte-identical across runs", ok,
           "");
}

} // namespace

int main() {
    criterion_1_rollout_stochasticity();
    criterion_2_component_oracle();
    criterion_3_gradient_check();
    criterion_4_baseline_identity();
    criterion_5_strategy_identities();
    criterion_6_lambda_monotonicity();
    criterion_7_desk_scale_learning();
    criterion_8_metrics_oracle();
    criterion_9_cli_determinism();
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
