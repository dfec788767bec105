#pragma once

// Pipeline configuration, read from JSON. Every field has a default:
//
// {
//   "streams": {"*": {"aggregators": ["mean", "std", "min"], "average_variants": true}},
//   "normalization": {"range_scale": true, "rootsift": true, "standardize": true},
//   "svm": {"C": 1, "tolerance": 1e-4, "max_epochs": 1000, "bias": true},
//   "ensemble": {"score_mode": "softmax", "class_weights": null, "class_counts": null},
//   "cv": {"grid": [0.00390625, ..., 64], "folds": 5},
//   "seed": 0
// }
//
// The stream key "*" applies to every stream without its own entry.

#include "emovid/aggregate.hpp"
#include "emovid/csv.hpp"
#include "emovid/ensemble.hpp"
#include "emovid/normalize.hpp"
#include "emovid/svm.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace emovid {

inline constexpr std::string_view kAnyStream = "*";

struct PipelineConfig {
    std::map<std::string, AggregationConfig, std::less<>> streams{{std::string(kAnyStream), AggregationConfig::stat_star()}};
    NormalizationToggles normalization;
    SvmTrainConfig svm;
    EnsembleConfig ensemble;
    std::vector<double> cv_grid = default_c_grid();
    std::size_t cv_folds = 5;
    std::uint64_t seed = 0;

    const AggregationConfig& aggregation_for(std::string_view stream) const {
        if (auto it = streams.find(stream); it != streams.end()) return it->second;
        if (auto it = streams.find(kAnyStream); it != streams.end()) return it->second;
        throw error("no aggregation config for stream '" + std::string(stream) + "'");
    }

    void validate() const {
        if (streams.empty()) throw error("config: at least one stream must be configured");
        for (const auto& [name, agg] : streams) {
            try {
                agg.validate();
            } catch (const error& e) {
                throw error("config: stream '" + name + "': " + e.what());
            }
        }
        if (cv_folds < 2) throw error("folds must be >= 2 (got " + std::to_string(cv_folds) + ")");
        if (cv_grid.empty()) throw error("config: CV grid is empty");
        svm.validate();
        ensemble.validate();
    }
};

inline AggregationConfig aggregation_from_json(const nlohmann::json& j) {
    AggregationConfig cfg = AggregationConfig::stat_star();
    if (j.is_array()) return aggregation_from_json(nlohmann::json{{"aggregators", j}});
    if (!j.is_object()) throw error("stream config must be an aggregator list or an object");
    if (j.contains("aggregators")) {
        cfg.aggregators.clear();
        for (const auto& a : j.at("aggregators")) cfg.aggregators.push_back(aggregator_from_name(a.get<std::string>()));
    }
    cfg.average_variants = j.value("average_variants", cfg.average_variants);
    return cfg;
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    try {
        if (!j.is_object()) throw error("config must be a JSON object");
        if (j.contains("streams")) {
            cfg.streams.clear();
            for (const auto& [name, value] : j.at("streams").items()) cfg.streams.emplace(name, aggregation_from_json(value));
        }
        if (j.contains("normalization")) {
            const auto& n = j.at("normalization");
            cfg.normalization.range_scale = n.value("range_scale", true);
            cfg.normalization.rootsift = n.value("rootsift", true);
            cfg.normalization.standardize = n.value("standardize", true);
        }
        if (j.contains("svm")) {
            const auto& s = j.at("svm");
            cfg.svm.C = s.value("C", cfg.svm.C);
            cfg.svm.tolerance = s.value("tolerance", cfg.svm.tolerance);
            cfg.svm.max_epochs = s.value("max_epochs", cfg.svm.max_epochs);
            cfg.svm.bias = s.value("bias", cfg.svm.bias);
        }
        if (j.contains("ensemble")) {
            const auto& e = j.at("ensemble");
            cfg.ensemble.score_mode = score_mode_from_name(e.value("score_mode", std::string("softmax")));
            if (e.contains("class_weights") && !e.at("class_weights").is_null()) {
                cfg.ensemble.class_weights = ClassWeights(e.at("class_weights").get<std::array<double, kNumClasses>>());
            }
            if (e.contains("class_counts") && !e.at("class_counts").is_null()) {
                if (cfg.ensemble.class_weights) throw error("config: give class_weights or class_counts, not both");
                cfg.ensemble.class_weights =
                    class_weights_from_counts(e.at("class_counts").get<std::array<std::uint64_t, kNumClasses>>());
            }
        }
        if (j.contains("cv")) {
            const auto& c = j.at("cv");
            if (c.contains("grid")) cfg.cv_grid = c.at("grid").get<std::vector<double>>();
            cfg.cv_folds = c.value("folds", cfg.cv_folds);
        }
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(csv::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw error(path.string() + ": invalid JSON (" + e.what() + ")");
    }
    try {
        return pipeline_config_from_json(j);
    } catch (const error& e) {
        throw error(path.string() + ": " + e.what());
    }
}

}  // namespace emovid
