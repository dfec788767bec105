#pragma once

// Score-level fusion of several per-stream SVMs and class-prior reweighting.

#include "emovid/core.hpp"
#include "emovid/svm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emovid {

enum class ScoreMode : std::uint8_t { raw, softmax };

inline std::string_view name_of(ScoreMode m) noexcept { return m == ScoreMode::raw ? "raw" : "softmax"; }

inline ScoreMode score_mode_from_name(std::string_view name) {
    if (name == "raw") return ScoreMode::raw;
    if (name == "softmax") return ScoreMode::softmax;
    throw error("unknown score mode '" + std::string(name) + "' (expected raw or softmax)");
}

struct EnsembleConfig {
    ScoreMode score_mode = ScoreMode::softmax;
    std::optional<ClassWeights> class_weights;

    void validate() const {
        if (score_mode == ScoreMode::raw && class_weights) {
            throw error("class weights require softmax score mode; weighting signed decision values is undefined");
        }
    }
};

/// w_c = sqrt(n_c) / sum_c' sqrt(n_c')
inline ClassWeights class_weights_from_counts(const std::array<std::uint64_t, kNumClasses>& counts) {
    std::array<double, kNumClasses> roots{};
    double total = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        roots[c] = std::sqrt(static_cast<double>(counts[c]));
        total += roots[c];
    }
    if (total == 0.0) throw error("class counts are all zero");
    for (auto& r : roots) r /= total;
    return ClassWeights(roots);
}

/// Exponential normalization of one row, max-subtracted.
inline ScoreRow softmax(const ScoreRow& row) {
    const double peak = *std::max_element(row.begin(), row.end());
    ScoreRow out{};
    double total = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        out[c] = std::exp(row[c] - peak);
        total += out[c];
    }
    for (auto& v : out) v /= total;
    return out;
}

/// Elementwise average across streams (after per-row softmax in softmax mode).
/// Each cell is summed in sorted order, so the result does not depend on
/// the order of `streams`.
inline ScoreMatrix combine_streams(std::span<const ScoreMatrix> streams, const EnsembleConfig& cfg) {
    if (streams.empty()) throw error("combine_streams: no score streams");
    for (const auto& s : streams) s.check_consistent();
    const auto& ref = streams.front();
    for (std::size_t k = 1; k < streams.size(); ++k) {
        const auto& s = streams[k];
        const std::size_t n = std::min(s.size(), ref.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (s.video_ids[i] != ref.video_ids[i]) {
                throw error("combine_streams: stream " + std::to_string(k) + " row " + std::to_string(i) +
                            " has id '" + s.video_ids[i] + "', expected '" + ref.video_ids[i] + "'");
            }
        }
        if (s.size() != ref.size()) {
            const auto& longer = s.size() > ref.size() ? s : ref;
            throw error("combine_streams: streams differ in length; first unmatched id '" + longer.video_ids[n] + "'");
        }
    }

    ScoreMatrix out;
    out.video_ids = ref.video_ids;
    out.scores.resize(ref.size());
    std::vector<ScoreRow> rows(streams.size());
    std::vector<double> cell(streams.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        for (std::size_t k = 0; k < streams.size(); ++k) {
            rows[k] = cfg.score_mode == ScoreMode::softmax ? softmax(streams[k].scores[i]) : streams[k].scores[i];
        }
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            for (std::size_t k = 0; k < streams.size(); ++k) cell[k] = rows[k][c];
            std::sort(cell.begin(), cell.end());
            double sum = 0.0;
            for (double v : cell) sum += v;
            out.scores[i][c] = sum / static_cast<double>(streams.size());
        }
    }
    return out;
}

/// scores[i][c] * w_c. Scores must be nonnegative (probability-like).
inline ScoreMatrix apply_class_weights(const ScoreMatrix& scores, const ClassWeights& w) {
    scores.check_consistent();
    ScoreMatrix out = scores;
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (out.scores[i][c] < 0.0) {
                throw error("apply_class_weights: negative score for video '" + out.video_ids[i] +
                            "'; weights need nonnegative (softmax) scores");
            }
            out.scores[i][c] *= w[c];
        }
    }
    return out;
}

/// Per row, the smallest class index attaining the maximal score.
inline std::vector<Emotion> predict(const ScoreMatrix& scores) {
    std::vector<Emotion> out;
    out.reserve(scores.size());
    for (const auto& row : scores.scores) out.push_back(argmax_class(row));
    return out;
}

/// combine_streams followed by optional class weighting.
inline ScoreMatrix ensemble_scores(std::span<const ScoreMatrix> streams, const EnsembleConfig& cfg) {
    cfg.validate();
    auto combined = combine_streams(streams, cfg);
    if (cfg.class_weights) combined = apply_class_weights(combined, *cfg.class_weights);
    return combined;
}

}  // namespace emovid
