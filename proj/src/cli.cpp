#include "did/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "did/category.hpp"
#include "did/dataset.hpp"
#include "did/experiments.hpp"
#include "did/metrics.hpp"
#include "did/netpbm.hpp"
#include "did/training.hpp"
#include "did/vit.hpp"

namespace did {

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void append_scores(std::string& out, const std::vector<double>& scores) {
    out += '[';
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (i) out += ',';
        out += fmt6(scores[i]);
    }
    out += ']';
}

// Everything a subcommand may need; each one binds only its own flags.
struct RunConfig {
    std::uint64_t seed = 0;
    ViTConfig vit;
    double lambda = 0.6;
    std::size_t topn = 4;
    std::string strategy = "hadamard";
    std::string order = "descending";
    TrainConfig train;
    std::string mode = "all";
    std::string weights_path, head_path, image_path, dataset_dir, out_path;
    bool global_only = false;

    PipelineConfig pipeline() const {
        PipelineConfig cfg;
        cfg.lambda = lambda;
        cfg.topn = topn;
        cfg.strategy = parse_strategy(strategy);
        cfg.order = parse_select_order(order);
        cfg.select_seed = seed;
        cfg.vit = vit;
        return cfg;
    }
};

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Flat `key = value` config support: file entries become flags injected right
// after the subcommand token, so explicit command-line flags (parsed with a
// take-last policy) override them.
std::vector<std::string> apply_flat_config(const std::vector<std::string>& args) {
    std::string path;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::runtime_error("--config requires a file path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (path.empty() || out.empty()) return out;

    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::string> injected;
    std::string line;
    while (std::getline(is, line)) {
        const std::string entry = trimmed(line);
        if (entry.empty() || entry[0] == '#') continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad config line (want key = value): " + line);
        const std::string key = trimmed(entry.substr(0, eq));
        const std::string value = trimmed(entry.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("bad config line: " + line);
        if (value == "true") {
            injected.push_back("--" + key);
        } else if (value == "false") {
            continue;
        } else {
            injected.push_back("--" + key);
            injected.push_back(value);
        }
    }
    out.insert(out.begin() + 1, injected.begin(), injected.end());
    return out;
}

void add_pipeline_flags(CLI::App* cmd, RunConfig& rc) {
    cmd->add_option("--lambda", rc.lambda, "foreground threshold coefficient in (0,1)");
    cmd->add_option("--topn", rc.topn, "number of category maps carried into localization");
    cmd->add_option("--strategy", rc.strategy, "re-constraint: hadamard|sum|identity");
    cmd->add_option("--order", rc.order, "map selection: descending|ascending|random");
}

void add_vit_flags(CLI::App* cmd, RunConfig& rc) {
    cmd->add_option("--image-size", rc.vit.image_size, "square input size in pixels");
    cmd->add_option("--patch-size", rc.vit.patch_size, "patch side in pixels");
    cmd->add_option("--dim", rc.vit.dim, "token channels");
    cmd->add_option("--layers", rc.vit.layers, "encoder depth");
    cmd->add_option("--heads", rc.vit.heads, "attention heads");
    cmd->add_option("--mlp-dim", rc.vit.mlp_dim, "FFN hidden width");
    cmd->add_option("--classes", rc.vit.num_classes, "number of categories");
}

std::pair<ViTConfig, BackboneWeights> load_backbone(const RunConfig& rc) {
    return load_weights(rc.weights_path);
}

void print_report(const MetricsReport& r) {
    std::cout << "mode=" << to_string(r.mode) << " mAP=" << fmt6(r.map)
              << " CP=" << fmt6(r.class_precision) << " CR=" << fmt6(r.class_recall)
              << " CF1=" << fmt6(r.class_f1) << " OP=" << fmt6(r.overall_precision)
              << " OR=" << fmt6(r.overall_recall) << " OF1=" << fmt6(r.overall_f1) << "\n";
}

} // namespace

std::string proposals_to_json(const PredictionResult& result) {
    std::string out = "{\"global_scores\":";
    append_scores(out, result.global_scores);
    out += ",\"fused_scores\":";
    append_scores(out, result.fused_scores);
    out += ",\"proposals\":[";
    for (std::size_t i = 0; i < result.proposals.size(); ++i) {
        const InstanceProposal& p = result.proposals[i];
        if (i) out += ',';
        out += "{\"class_id\":" + std::to_string(p.class_id);
        out += ",\"score\":" + fmt6(p.confidence);
        out += ",\"bbox\":[" + std::to_string(p.bbox.x0) + ',' + std::to_string(p.bbox.y0) + ',' +
               std::to_string(p.bbox.x1) + ',' + std::to_string(p.bbox.y1) + "]}";
    }
    out += "]}\n";
    return out;
}

void write_proposals_json(const PredictionResult& result, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_proposals_json: cannot open " + path);
    os << proposals_to_json(result);
    if (!os) throw std::runtime_error("write_proposals_json: write failed for " + path);
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"diverse instance discovery: instance-aware multi-label recognition"};
    app.require_subcommand(1);
    RunConfig rc;
    std::string config_doc;
    auto make_command = [&](const std::string& name, const std::string& desc) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd->add_option("--config", config_doc, "flat key = value file; explicit flags override");
        return cmd;
    };

    auto* init_cmd = make_command("init-weights", "write seeded backbone weights");
    init_cmd->add_option("--seed", rc.seed, "generator seed");
    add_vit_flags(init_cmd, rc);
    init_cmd->add_option("--out", rc.out_path, "output weights file")->required();
    init_cmd->callback([&] { save_weights(rc.vit, init_weights(rc.vit, rc.seed), rc.out_path); });

    auto* gen_cmd = make_command("gen-data", "write a synthetic shape dataset");
    gen_cmd->add_option("--seed", rc.seed, "generator seed");
    std::size_t gen_count = 100, gen_size = 64, gen_classes = 4;
    gen_cmd->add_option("--count", gen_count, "number of images");
    gen_cmd->add_option("--size", gen_size, "image side in pixels");
    gen_cmd->add_option("--classes", gen_classes, "shape classes (max 4)");
    gen_cmd->add_option("--out", rc.dataset_dir, "output directory")->required();
    gen_cmd->callback([&] {
        save_dataset(generate_synthetic(rc.seed, gen_count, gen_size, gen_classes),
                     rc.dataset_dir);
    });

    auto* train_cmd = make_command("train", "train the category head");
    train_cmd->add_option("--dataset", rc.dataset_dir, "dataset directory")->required();
    train_cmd->add_option("--weights", rc.weights_path, "backbone weights file")->required();
    train_cmd->add_option("--head-out", rc.out_path, "output head file")->required();
    train_cmd->add_option("--seed", rc.seed, "shuffle and head-init seed");
    train_cmd->add_option("--steps", rc.train.total_steps, "optimizer steps");
    train_cmd->add_option("--lr", rc.train.base_lr, "base learning rate");
    train_cmd->add_option("--momentum", rc.train.momentum, "SGD momentum");
    train_cmd->add_option("--weight-decay", rc.train.weight_decay, "L2 coefficient");
    train_cmd->add_option("--batch-size", rc.train.batch_size, "examples per step");
    train_cmd->add_option("--warmup-frac", rc.train.warmup_fraction, "warmup fraction of steps");
    add_pipeline_flags(train_cmd, rc);
    train_cmd->callback([&] {
        auto [cfg, weights] = load_backbone(rc);
        rc.vit = cfg;
        const std::vector<LabeledImage> data = load_dataset(rc.dataset_dir);
        save_head(train_head(data, weights, rc.train, rc.pipeline(), rc.seed), rc.out_path);
    });

    auto* predict_cmd = make_command("predict", "multi-view prediction for one image");
    predict_cmd->add_option("--image", rc.image_path, "input PPM image")->required();
    predict_cmd->add_option("--weights", rc.weights_path, "backbone weights file")->required();
    predict_cmd->add_option("--head", rc.head_path, "category head file")->required();
    predict_cmd->add_option("--out", rc.out_path, "output JSON file")->required();
    predict_cmd->add_option("--seed", rc.seed, "seed for random selection order");
    add_pipeline_flags(predict_cmd, rc);
    predict_cmd->callback([&] {
        auto [cfg, weights] = load_backbone(rc);
        rc.vit = cfg;
        const PredictionResult result =
            predict(read_ppm(rc.image_path), weights, load_head(rc.head_path), rc.pipeline());
        write_proposals_json(result, rc.out_path);
    });

    auto* eval_cmd = make_command("eval", "metrics over a labeled dataset");
    eval_cmd->add_option("--dataset", rc.dataset_dir, "dataset directory")->required();
    eval_cmd->add_option("--weights", rc.weights_path, "backbone weights file")->required();
    eval_cmd->add_option("--head", rc.head_path, "category head file")->required();
    eval_cmd->add_option("--mode", rc.mode, "all|top3");
    eval_cmd->add_option("--seed", rc.seed, "seed for random selection order");
    eval_cmd->add_flag("--global-only", rc.global_only, "score without local views");
    add_pipeline_flags(eval_cmd, rc);
    eval_cmd->callback([&] {
        auto [cfg, weights] = load_backbone(rc);
        rc.vit = cfg;
        const MetricsReport report =
            evaluate_pipeline(load_dataset(rc.dataset_dir), weights, load_head(rc.head_path),
                              rc.pipeline(), parse_metric_mode(rc.mode), !rc.global_only);
        print_report(report);
    });

    auto* ablate_cmd = make_command("ablate", "sweep one pipeline axis, emit CSV");
    std::string axis, grid;
    ablate_cmd->add_option("--axis", axis, "lambda|topn|strategy|order")->required();
    ablate_cmd->add_option("--grid", grid, "start:end:step for numeric axes");
    ablate_cmd->add_option("--dataset", rc.dataset_dir, "dataset directory")->required();
    ablate_cmd->add_option("--weights", rc.weights_path, "backbone weights file")->required();
    ablate_cmd->add_option("--head", rc.head_path, "category head file")->required();
    ablate_cmd->add_option("--out", rc.out_path, "output CSV file (default stdout)");
    ablate_cmd->add_option("--mode", rc.mode, "all|top3");
    ablate_cmd->add_option("--seed", rc.seed, "seed for random selection order");
    add_pipeline_flags(ablate_cmd, rc);
    ablate_cmd->callback([&] {
        auto [cfg, weights] = load_backbone(rc);
        rc.vit = cfg;
        const std::vector<AblationRow> rows = run_ablation(
            parse_ablation_axis(axis), grid, load_dataset(rc.dataset_dir), weights,
            load_head(rc.head_path), rc.pipeline(), parse_metric_mode(rc.mode));
        const std::string csv = ablation_csv(rows);
        if (rc.out_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream os(rc.out_path, std::ios::binary | std::ios::trunc);
            if (!os) throw std::runtime_error("ablate: cannot open " + rc.out_path);
            os << csv;
        }
    });

    auto* rollout_cmd = make_command("rollout-dump", "write the rollout prior as PGM");
    rollout_cmd->add_option("--image", rc.image_path, "input PPM image")->required();
    rollout_cmd->add_option("--weights", rc.weights_path, "backbone weights file")->required();
    rollout_cmd->add_option("--out", rc.out_path, "output PGM file")->required();
    rollout_cmd->callback([&] {
        auto [cfg, weights] = load_backbone(rc);
        const GlobalPass pass = run_backbone(read_ppm(rc.image_path), cfg, weights);
        write_pgm(pass.prior, rc.out_path);
    });

    try {
        const std::vector<std::string> expanded = apply_flat_config(args);
        std::vector<const char*> argv;
        argv.reserve(expanded.size() + 1);
        argv.push_back("did");
        for (const std::string& a : expanded) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace did
