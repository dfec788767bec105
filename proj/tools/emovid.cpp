// emovid: command-line driver for the video emotion pipeline.
//
//   synth      generate a synthetic dataset (manifest + feature files)
//   aggregate  frame features -> one descriptor CSV per stream
//   cv         k-fold selection of the SVM constant C
//   train      fit normalization + one-vs-rest SVM, write a model file
//   predict    model + descriptors -> score CSV (and predictions)
//   ensemble   average score files, optional class weighting -> predictions
//   weigh      class counts -> square-root class weights
//   evaluate   predictions vs manifest labels -> accuracy / confusion report

#include "emovid/aggregate.hpp"
#include "emovid/config.hpp"
#include "emovid/core.hpp"
#include "emovid/csv.hpp"
#include "emovid/ensemble.hpp"
#include "emovid/eval.hpp"
#include "emovid/ingest.hpp"
#include "emovid/io.hpp"
#include "emovid/svm.hpp"
#include "emovid/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace emovid;

namespace {

struct Options {
    std::string manifest;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string splits;
    std::string features_dir;
    std::string descriptors;
    std::string model;
    std::vector<std::string> scores;
    std::string mode;
    std::string weights;
    std::string weights_kind = "counts";
    std::string counts;
    std::string predictions;
    std::string predictions_out;
    std::string scores_out;
    std::string cv_report;
    std::string grid;
    std::optional<std::size_t> folds;
    std::optional<double> c;
};

PipelineConfig pipeline_config(const Options& o) {
    auto cfg = o.config.empty() ? PipelineConfig{} : load_pipeline_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.folds) cfg.cv_folds = *o.folds;
    if (!o.grid.empty()) {
        cfg.cv_grid.clear();
        for (auto f : csv::split(o.grid)) cfg.cv_grid.push_back(csv::parse_double(f));
    }
    cfg.validate();
    return cfg;
}

SvmTrainConfig svm_config(const PipelineConfig& cfg) {
    auto svm = cfg.svm;
    svm.seed = mix_seed(cfg.seed, "svm");
    return svm;
}

std::set<Split> parse_splits(const std::string& list) {
    std::set<Split> out;
    for (auto s : csv::split(list)) {
        if (!s.empty()) out.insert(split_from_name(s));
    }
    if (out.empty()) throw error("--splits names no split");
    return out;
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty()) {
        std::cout << content;
    } else {
        csv::write_file(out, content);
    }
}

/// Descriptor rows restricted to manifest videos in the given splits, with labels.
struct LabelledSet {
    std::vector<std::string> ids;
    Matrix features;
    std::vector<Emotion> labels;
};

LabelledSet select(const DescriptorTable& table, const Manifest& manifest, const std::set<Split>& splits,
                   bool need_labels) {
    LabelledSet set;
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        const auto* entry = manifest.find(table.ids[i]);
        if (!entry) throw error("descriptor video '" + table.ids[i] + "' is not in the manifest");
        if (!splits.contains(entry->split)) continue;
        if (need_labels) {
            if (!entry->label) throw error("video '" + table.ids[i] + "' in the fit set has no label");
            set.labels.push_back(*entry->label);
        }
        set.ids.push_back(table.ids[i]);
        set.features.push_row(table.features.row(i));
    }
    if (set.ids.empty()) throw error("no videos in the selected splits");
    return set;
}

int cmd_synth(const Options& o) {
    SynthConfig cfg;
    if (!o.config.empty()) cfg = synth_config_from_json(nlohmann::json::parse(csv::read_file(o.config)));
    if (o.seed) cfg.seed = *o.seed;
    if (o.out.empty()) throw error("synth: --out directory is required");
    const auto manifest = generate_dataset(cfg, o.out);
    std::cout << manifest.string() << "\n";
    return 0;
}

int cmd_aggregate(const Options& o) {
    const auto cfg = pipeline_config(o);
    const auto manifest = load_manifest(o.manifest, o.features_dir);
    if (manifest.entries.empty()) throw error("manifest has no videos");
    if (o.out.empty()) throw error("aggregate: --out directory is required");
    for (const auto& stream : manifest.stream_names()) {
        std::vector<VideoDescriptor> descriptors;
        descriptors.reserve(manifest.entries.size());
        for (const auto& entry : manifest.entries) {
            const auto it = entry.streams.find(stream);
            if (it == entry.streams.end()) throw error("video '" + entry.video_id + "' lacks stream '" + stream + "'");
            try {
                auto data = load_stream(it->second, entry.video_id);
                if (auto* seq = std::get_if<FrameFeatureSequence>(&data)) {
                    descriptors.push_back(build_video_descriptor(*seq, cfg.aggregation_for(stream)));
                } else {
                    descriptors.push_back(vector_descriptor(entry.video_id, std::get<std::vector<double>>(data)));
                }
            } catch (const error& e) {
                throw error("video '" + entry.video_id + "', stream '" + stream + "': " + e.what());
            }
        }
        const auto path = fs::path(o.out) / (stream + ".csv");
        csv::write_file(path, descriptors_csv(descriptors));
        std::cout << stream << ": " << descriptors.size() << " videos, D=" << descriptors.front().features.size()
                  << " -> " << path.string() << "\n";
    }
    return 0;
}

std::string cv_report_json(const CvResult& r, std::size_t folds) {
    std::string out = "{\"best_c\": " + csv::format_double(r.best_c) + ", \"folds\": " + std::to_string(folds) +
                      ", \"rows\": [";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        out += i ? ", " : "";
        out += "{\"C\": " + csv::format_double(row.C) + ", \"mean_accuracy\": " + csv::format_double(row.mean_accuracy) +
               ", \"fold_accuracies\": [";
        for (std::size_t f = 0; f < row.fold_accuracies.size(); ++f) {
            out += (f ? ", " : "") + csv::format_double(row.fold_accuracies[f]);
        }
        out += "]}";
    }
    return out + "]}\n";
}

int cmd_cv(const Options& o) {
    const auto cfg = pipeline_config(o);
    const auto table = read_descriptors(o.descriptors);
    const auto manifest = load_manifest(o.manifest, {}, false);
    const auto set = select(table, manifest, parse_splits(o.splits.empty() ? "train" : o.splits), true);
    const auto result = cross_validate_c(set.features, set.labels, set.ids, cfg.cv_grid, cfg.cv_folds,
                                         mix_seed(cfg.seed, "cv"), svm_config(cfg), cfg.normalization);
    std::cout << "         C  accuracy\n";
    for (const auto& row : result.rows) {
        char line[96];
        std::snprintf(line, sizeof line, "%10.6g  %8.4f\n", row.C, row.mean_accuracy);
        std::cout << line;
    }
    std::cout << "best C = " << csv::format_double(result.best_c) << "\n";
    if (!o.out.empty()) csv::write_file(o.out, cv_report_json(result, cfg.cv_folds));
    return 0;
}

int cmd_train(const Options& o) {
    auto cfg = pipeline_config(o);
    if (o.out.empty()) throw error("train: --out model path is required");
    if (!o.cv_report.empty()) {
        const auto report = nlohmann::json::parse(csv::read_file(o.cv_report));
        cfg.svm.C = report.at("best_c").get<double>();
    }
    if (o.c) cfg.svm.C = *o.c;
    const auto table = read_descriptors(o.descriptors);
    const auto manifest = load_manifest(o.manifest, {}, false);
    const auto set = select(table, manifest, parse_splits(o.splits.empty() ? "train" : o.splits), true);
    const auto model = fit_model(set.features, set.labels, svm_config(cfg), cfg.normalization);
    write_model(o.out, model);
    std::cout << "trained on " << set.ids.size() << " videos, C=" << csv::format_double(cfg.svm.C) << "\n";
    return 0;
}

int cmd_predict(const Options& o) {
    const auto model = read_model(o.model);
    const auto table = read_descriptors(o.descriptors);
    std::vector<std::string> ids = table.ids;
    Matrix features = table.features;
    if (!o.splits.empty()) {
        if (o.manifest.empty()) throw error("predict: --splits needs --manifest");
        auto set = select(table, load_manifest(o.manifest, {}, false), parse_splits(o.splits), false);
        ids = std::move(set.ids);
        features = std::move(set.features);
    }
    const auto scores = decision_scores(model, features, ids);
    emit(o.out, scores_csv(scores));
    if (!o.predictions_out.empty()) csv::write_file(o.predictions_out, predictions_csv(scores.video_ids, predict(scores)));
    return 0;
}

int cmd_ensemble(const Options& o) {
    auto cfg = pipeline_config(o);
    if (o.scores.empty()) throw error("ensemble: at least one --scores file is required");
    if (!o.mode.empty()) cfg.ensemble.score_mode = score_mode_from_name(o.mode);
    if (!o.weights.empty()) {
        WeightsKind kind = o.weights_kind == "counts" ? WeightsKind::counts : WeightsKind::weights;
        if (o.weights_kind != "counts" && o.weights_kind != "weights") {
            throw error("--weights-kind must be 'counts' or 'weights'");
        }
        cfg.ensemble.class_weights = read_weights_file(o.weights, kind);
    }
    std::vector<ScoreMatrix> streams;
    for (const auto& path : o.scores) streams.push_back(read_scores(path));
    const auto combined = ensemble_scores(streams, cfg.ensemble);
    if (!o.scores_out.empty()) csv::write_file(o.scores_out, scores_csv(combined));
    emit(o.out, predictions_csv(combined.video_ids, predict(combined)));
    return 0;
}

int cmd_weigh(const Options& o) {
    ClassWeights w = ClassWeights::uniform();
    if (!o.counts.empty()) {
        w = parse_weights_row(o.counts, WeightsKind::counts);
    } else if (!o.weights.empty()) {
        w = read_weights_file(o.weights, WeightsKind::counts);
    } else {
        throw error("weigh: give --counts or --counts-file");
    }
    const auto row = weights_csv(w);
    std::cout << row;
    if (!o.out.empty()) csv::write_file(o.out, row);
    return 0;
}

int cmd_evaluate(const Options& o) {
    const auto preds = read_predictions(o.predictions);
    const auto manifest = load_manifest(o.manifest, {}, false);
    std::optional<std::set<Split>> splits;
    if (!o.splits.empty()) splits = parse_splits(o.splits);
    std::vector<Emotion> predicted;
    std::vector<Emotion> truth;
    for (std::size_t i = 0; i < preds.ids.size(); ++i) {
        const auto* entry = manifest.find(preds.ids[i]);
        if (!entry) throw error("predicted video '" + preds.ids[i] + "' is not in the manifest");
        if (splits && !splits->contains(entry->split)) continue;
        if (!entry->label) throw error("video '" + preds.ids[i] + "' has no ground-truth label");
        predicted.push_back(preds.labels[i]);
        truth.push_back(*entry->label);
    }
    const auto report = evaluate(predicted, truth);
    std::cout << render_report(report);
    if (!o.out.empty()) csv::write_file(o.out, report_json(report));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Video-level emotion classification from per-frame features"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config, "pipeline config JSON");
        cmd->add_option("--seed", o.seed, "top-level seed");
        cmd->add_option("--out", o.out, "output path");
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    common(synth);

    auto* aggregate = app.add_subcommand("aggregate", "aggregate frame features into descriptors");
    common(aggregate);
    aggregate->add_option("--manifest", o.manifest)->required();
    aggregate->add_option("--features-dir", o.features_dir, "root for stream paths (default: manifest dir)");

    auto* cv = app.add_subcommand("cv", "cross-validate the SVM constant C");
    common(cv);
    cv->add_option("--manifest", o.manifest)->required();
    cv->add_option("--descriptors", o.descriptors)->required();
    cv->add_option("--splits", o.splits, "comma-separated splits (default train)");
    cv->add_option("--folds", o.folds);
    cv->add_option("--grid", o.grid, "comma-separated C values");

    auto* train = app.add_subcommand("train", "train normalization + one-vs-rest SVM");
    common(train);
    train->add_option("--manifest", o.manifest)->required();
    train->add_option("--descriptors", o.descriptors)->required();
    train->add_option("--splits", o.splits, "comma-separated splits (default train)");
    train->add_option("--c", o.c, "regularization constant");
    train->add_option("--cv-report", o.cv_report, "take C from a cv report");

    auto* predict_cmd = app.add_subcommand("predict", "score descriptors with a model");
    common(predict_cmd);
    predict_cmd->add_option("--model", o.model)->required();
    predict_cmd->add_option("--descriptors", o.descriptors)->required();
    predict_cmd->add_option("--manifest", o.manifest);
    predict_cmd->add_option("--splits", o.splits);
    predict_cmd->add_option("--predictions-out", o.predictions_out);

    auto* ensemble = app.add_subcommand("ensemble", "average score files and predict");
    common(ensemble);
    ensemble->add_option("--scores", o.scores, "score CSV (repeatable)")->required();
    ensemble->add_option("--mode", o.mode, "raw or softmax");
    ensemble->add_option("--weights", o.weights, "weights CSV");
    ensemble->add_option("--weights-kind", o.weights_kind, "counts or weights");
    ensemble->add_option("--scores-out", o.scores_out);

    auto* weigh = app.add_subcommand("weigh", "square-root class weights from counts");
    common(weigh);
    weigh->add_option("--counts", o.counts, "7 comma-separated counts");
    weigh->add_option("--counts-file", o.weights, "CSV with one row of 7 counts");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "accuracy and confusion matrix");
    common(evaluate_cmd);
    evaluate_cmd->add_option("--predictions", o.predictions)->required();
    evaluate_cmd->add_option("--manifest", o.manifest)->required();
    evaluate_cmd->add_option("--splits", o.splits);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "emovid: error: " << e.what() << " (run with --help for usage)\n";
        return 1;
    }

    try {
        if (*synth) return cmd_synth(o);
        if (*aggregate) return cmd_aggregate(o);
        if (*cv) return cmd_cv(o);
        if (*train) return cmd_train(o);
        if (*predict_cmd) return cmd_predict(o);
        if (*ensemble) return cmd_ensemble(o);
        if (*weigh) return cmd_weigh(o);
        if (*evaluate_cmd) return cmd_evaluate(o);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (auto& ch : msg) {
            if (ch == '\n') ch = ' ';
        }
        std::cerr << "emovid: error: " << msg << "\n";
        return 1;
    }
    return 1;
}
