#pragma once

// Pipeline file formats.
//
//   descriptors  CSV  id,<agg>_0,...           one row per video, manifest order
//   scores       CSV  id,Angry,...,Surprise    one row per video
//   predictions  CSV  id,label
//   weights      CSV  one row of 7 counts or 7 weights (an optional name header is skipped)
//   model        JSON format_version 1, see model_json()
//
// Every float is written with 17 significant digits.

#include "emovid/core.hpp"
#include "emovid/csv.hpp"
#include "emovid/ensemble.hpp"
#include "emovid/svm.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace emovid {

// ---- descriptors -------------------------------------------------------------

struct DescriptorTable {
    std::vector<std::string> ids;
    std::vector<std::string> columns;
    Matrix features;

    const std::string& id(std::size_t i) const { return ids[i]; }
};

inline std::vector<std::string> descriptor_columns(const std::vector<DescriptorBlock>& provenance) {
    std::vector<std::string> cols;
    for (const auto& b : provenance) {
        for (std::size_t j = 0; j < b.length; ++j) cols.push_back(b.aggregator + "_" + std::to_string(j));
    }
    return cols;
}

inline std::string descriptors_csv(const std::vector<VideoDescriptor>& descriptors) {
    if (descriptors.empty()) throw error("no descriptors to write");
    const auto& provenance = descriptors.front().provenance;
    std::string out = "id";
    for (const auto& c : descriptor_columns(provenance)) out += "," + c;
    out += '\n';
    for (const auto& d : descriptors) {
        if (d.provenance != provenance) throw error("descriptor '" + d.video_id + "' has a different block layout");
        out += d.video_id;
        for (double v : d.features) out += "," + csv::format_double(v);
        out += '\n';
    }
    return out;
}

inline DescriptorTable read_descriptors(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw error(path.string() + ": empty descriptor file");
    const auto header = csv::split(lines.front());
    if (header.empty() || header[0] != "id") throw error(path.string() + ": header must start with 'id'");
    DescriptorTable table;
    for (std::size_t j = 1; j < header.size(); ++j) table.columns.emplace_back(header[j]);
    std::vector<double> row(table.columns.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv::split(lines[i]);
        const auto where = path.string() + " line " + std::to_string(i + 1) + ": ";
        if (fields.size() != header.size()) throw error(where + "ragged row");
        try {
            for (std::size_t j = 1; j < fields.size(); ++j) row[j - 1] = csv::parse_double(fields[j]);
        } catch (const error& e) {
            throw error(where + e.what());
        }
        table.ids.emplace_back(fields[0]);
        table.features.push_row(row);
    }
    return table;
}

// ---- scores ------------------------------------------------------------------

inline std::string scores_csv(const ScoreMatrix& scores) {
    scores.check_consistent();
    std::string out = "id";
    for (auto name : kEmotionNames) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out += scores.video_ids[i];
        for (double v : scores.scores[i]) out += "," + csv::format_double(v);
        out += '\n';
    }
    return out;
}

inline ScoreMatrix read_scores(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw error(path.string() + ": empty score file");
    const auto header = csv::split(lines.front());
    if (header.size() != kNumClasses + 1 || header[0] != "id") {
        throw error(path.string() + ": header must be id,Angry,Disgust,Fear,Happy,Neutral,Sad,Surprise");
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (header[c + 1] != kEmotionNames[c]) {
            throw error(path.string() + ": score column " + std::to_string(c + 1) + " is '" +
                        std::string(header[c + 1]) + "', expected '" + std::string(kEmotionNames[c]) + "'");
        }
    }
    ScoreMatrix scores;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv::split(lines[i]);
        const auto where = path.string() + " line " + std::to_string(i + 1) + ": ";
        if (fields.size() != kNumClasses + 1) throw error(where + "expected 8 fields");
        ScoreRow row{};
        try {
            for (std::size_t c = 0; c < kNumClasses; ++c) row[c] = csv::parse_double(fields[c + 1]);
        } catch (const error& e) {
            throw error(where + e.what());
        }
        scores.video_ids.emplace_back(fields[0]);
        scores.scores.push_back(row);
    }
    return scores;
}

// ---- predictions -------------------------------------------------------------

struct Predictions {
    std::vector<std::string> ids;
    std::vector<Emotion> labels;
};

inline std::string predictions_csv(const std::vector<std::string>& ids, const std::vector<Emotion>& labels) {
    if (ids.size() != labels.size()) throw error("predictions: ids and labels differ in length");
    std::string out = "id,label\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += ids[i];
        out += ',';
        out += name_of(labels[i]);
        out += '\n';
    }
    return out;
}

inline Predictions read_predictions(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || csv::split(lines.front()) != std::vector<std::string_view>{"id", "label"}) {
        throw error(path.string() + ": header must be 'id,label'");
    }
    Predictions p;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv::split(lines[i]);
        if (fields.size() != 2) throw error(path.string() + " line " + std::to_string(i + 1) + ": expected 2 fields");
        p.ids.emplace_back(fields[0]);
        try {
            p.labels.push_back(label_from_name(fields[1]));
        } catch (const error& e) {
            throw error(path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return p;
}

// ---- weights -----------------------------------------------------------------

enum class WeightsKind { counts, weights };

inline ClassWeights parse_weights_row(std::string_view line, WeightsKind kind) {
    const auto fields = csv::split(line);
    if (fields.size() != kNumClasses) {
        throw error("weights row must have 7 values, found " + std::to_string(fields.size()));
    }
    if (kind == WeightsKind::counts) {
        std::array<std::uint64_t, kNumClasses> counts{};
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const auto v = csv::parse_integer(fields[c]);
            if (v < 0) throw error("class counts must be nonnegative");
            counts[c] = static_cast<std::uint64_t>(v);
        }
        return class_weights_from_counts(counts);
    }
    std::array<double, kNumClasses> w{};
    for (std::size_t c = 0; c < kNumClasses; ++c) w[c] = csv::parse_double(fields[c]);
    return ClassWeights(w);
}

inline ClassWeights read_weights_file(const std::filesystem::path& path, WeightsKind kind) {
    auto lines = csv::read_lines(path);
    if (!lines.empty() && csv::split(lines.front()).front() == kEmotionNames[0]) lines.erase(lines.begin());
    if (lines.size() != 1) throw error(path.string() + ": expected a single row of 7 values");
    try {
        return parse_weights_row(lines.front(), kind);
    } catch (const error& e) {
        throw error(path.string() + ": " + e.what());
    }
}

inline std::string weights_csv(const ClassWeights& w) {
    std::string out;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (c) out += ',';
        out += csv::format_double(w[c]);
    }
    return out + "\n";
}

// ---- model -------------------------------------------------------------------

namespace detail {

inline std::string json_array(std::span<const double> values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += csv::format_double(values[i]);
    }
    return out + "]";
}

inline std::vector<double> finite_array(const nlohmann::json& j, const char* what) {
    if (!j.is_array()) throw error(std::string("model: '") + what + "' must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw error(std::string("model: '") + what + "' must contain numbers");
        out.push_back(v.get<double>());
    }
    if (!all_finite(out)) throw error(std::string("model: '") + what + "' contains a non-finite value");
    return out;
}

}  // namespace detail

inline std::string model_json(const LinearSvmModel& m) {
    const auto& cfg = m.config;
    const auto& norm = m.normalization;
    std::string out = "{\n";
    out += "  \"format_version\": " + std::to_string(LinearSvmModel::kFormatVersion) + ",\n";
    out += "  \"config\": {\"C\": " + csv::format_double(cfg.C) + ", \"tolerance\": " +
           csv::format_double(cfg.tolerance) + ", \"max_epochs\": " + std::to_string(cfg.max_epochs) +
           ", \"seed\": " + std::to_string(cfg.seed) + ", \"bias\": " + (cfg.bias ? "true" : "false") + "},\n";
    out += std::string("  \"normalization\": {\"range_scale\": ") + (norm.range ? "true" : "false") +
           ", \"rootsift\": " + (norm.rootsift ? "true" : "false") +
           ", \"standardize\": " + (norm.standardizer ? "true" : "false") + "},\n";
    out += "  \"range_scaler\": ";
    out += norm.range ? "{\"mins\": " + detail::json_array(norm.range->mins) +
                            ", \"maxs\": " + detail::json_array(norm.range->maxs) + "}"
                      : std::string("null");
    out += ",\n  \"standardizer\": ";
    out += norm.standardizer ? "{\"means\": " + detail::json_array(norm.standardizer->means) +
                                   ", \"stds\": " + detail::json_array(norm.standardizer->stds) + "}"
                             : std::string("null");
    out += ",\n  \"label_order\": [";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        out += c ? ", \"" : "\"";
        out += kEmotionNames[c];
        out += "\"";
    }
    out += "],\n  \"weights\": [\n";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        out += "    " + detail::json_array(m.weights[c]) + (c + 1 < kNumClasses ? ",\n" : "\n");
    }
    out += "  ]\n}\n";
    return out;
}

inline LinearSvmModel parse_model(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw error(std::string("model: invalid JSON (") + e.what() + ")");
    }
    try {
        if (j.at("format_version").get<int>() != LinearSvmModel::kFormatVersion) {
            throw error("model: unsupported format_version " + j.at("format_version").dump());
        }
        const auto& order = j.at("label_order");
        if (!order.is_array() || order.size() != kNumClasses) throw error("model: label_order must list 7 labels");
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (order[c].get<std::string>() != kEmotionNames[c]) {
                throw error("model: label_order differs from the canonical order at position " + std::to_string(c));
            }
        }
        LinearSvmModel m;
        const auto& cfg = j.at("config");
        m.config.C = cfg.at("C").get<double>();
        m.config.tolerance = cfg.at("tolerance").get<double>();
        m.config.max_epochs = cfg.at("max_epochs").get<std::size_t>();
        m.config.seed = cfg.at("seed").get<std::uint64_t>();
        m.config.bias = cfg.at("bias").get<bool>();
        m.config.validate();

        const auto& ws = j.at("weights");
        if (!ws.is_array() || ws.size() != kNumClasses) throw error("model: 'weights' must hold 7 arrays");
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            m.weights[c] = detail::finite_array(ws[c], "weights");
            if (m.weights[c].size() != m.weights[0].size()) throw error("model: weight vectors differ in length");
        }
        if (m.weights[0].size() < (m.config.bias ? 1u : 0u)) throw error("model: weight vectors too short");
        const auto dims = m.input_dims();

        if (const auto& rs = j.at("range_scaler"); !rs.is_null()) {
            RangeScalerParams p{detail::finite_array(rs.at("mins"), "mins"), detail::finite_array(rs.at("maxs"), "maxs")};
            if (p.mins.size() != dims || p.maxs.size() != dims) throw error("model: range_scaler width mismatch");
            m.normalization.range = std::move(p);
        }
        m.normalization.rootsift = j.at("normalization").at("rootsift").get<bool>();
        if (const auto& st = j.at("standardizer"); !st.is_null()) {
            StandardizerParams p{detail::finite_array(st.at("means"), "means"),
                                 detail::finite_array(st.at("stds"), "stds")};
            if (p.means.size() != dims || p.stds.size() != dims) throw error("model: standardizer width mismatch");
            m.normalization.standardizer = std::move(p);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("model: ") + e.what());
    }
}

inline void write_model(const std::filesystem::path& path, const LinearSvmModel& m) {
    csv::write_file(path, model_json(m));
}

inline LinearSvmModel read_model(const std::filesystem::path& path) {
    try {
        return parse_model(csv::read_file(path));
    } catch (const error& e) {
        throw error(path.string() + ": " + e.what());
    }
}

}  // namespace emovid
