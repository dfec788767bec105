#pragma once

// Video-level accuracy, confusion matrix and per-class recall.

#include "emovid/core.hpp"
#include "emovid/csv.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace emovid {

struct EvaluationReport {
    double accuracy = 0.0;
    /// rows = true class, columns = predicted class
    std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> confusion{};
    std::array<double, kNumClasses> per_class_recall{};
    std::uint64_t n = 0;

    std::uint64_t correct() const noexcept {
        std::uint64_t t = 0;
        for (std::size_t c = 0; c < kNumClasses; ++c) t += confusion[c][c];
        return t;
    }
    std::uint64_t row_sum(std::size_t c) const noexcept {
        std::uint64_t s = 0;
        for (auto v : confusion[c]) s += v;
        return s;
    }
};

inline EvaluationReport evaluate(std::span<const Emotion> predictions, std::span<const Emotion> truths) {
    if (predictions.size() != truths.size()) {
        throw error("evaluate: " + std::to_string(predictions.size()) + " predictions but " +
                    std::to_string(truths.size()) + " ground-truth labels");
    }
    if (truths.empty()) throw error("evaluate: no samples");
    EvaluationReport r;
    r.n = truths.size();
    for (std::size_t i = 0; i < truths.size(); ++i) ++r.confusion[index_of(truths[i])][index_of(predictions[i])];
    r.accuracy = static_cast<double>(r.correct()) / static_cast<double>(r.n);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto rs = r.row_sum(c);
        r.per_class_recall[c] = rs == 0 ? 0.0 : static_cast<double>(r.confusion[c][c]) / static_cast<double>(rs);
    }
    return r;
}

/// 100 * num / den with two decimals, rounded half to even. Exact integer
/// arithmetic, so ties are real ties.
inline std::string format_percent(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return "0.00";
    const std::uint64_t scaled = num * 10000;
    std::uint64_t q = scaled / den;
    const std::uint64_t rem = scaled % den;
    if (2 * rem > den || (2 * rem == den && q % 2 == 1)) ++q;
    std::string frac = std::to_string(q % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return std::to_string(q / 100) + "." + frac;
}

inline std::string render_report(const EvaluationReport& r) {
    auto pad = [](std::string s, std::size_t width) {
        if (s.size() < width) s.insert(0, width - s.size(), ' ');
        return s;
    };
    std::string out = "true\\pred";
    for (auto name : kEmotionShortNames) out += pad(std::string(name), 6);
    out += pad("recall", 9) + "\n";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        out += pad(std::string(kEmotionShortNames[c]), 9);
        for (std::size_t p = 0; p < kNumClasses; ++p) out += pad(std::to_string(r.confusion[c][p]), 6);
        out += pad(format_percent(r.confusion[c][c], r.row_sum(c)), 9) + "\n";
    }
    out += "n = " + std::to_string(r.n) + "\n";
    out += "accuracy = " + format_percent(r.correct(), r.n) + "\n";
    return out;
}

inline std::string report_json(const EvaluationReport& r) {
    std::string out = "{\"accuracy\": " + csv::format_double(r.accuracy) + ", \"confusion\": [";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        out += c ? ", [" : "[";
        for (std::size_t p = 0; p < kNumClasses; ++p) {
            if (p) out += ", ";
            out += std::to_string(r.confusion[c][p]);
        }
        out += "]";
    }
    out += "], \"per_class_recall\": [";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (c) out += ", ";
        out += csv::format_double(r.per_class_recall[c]);
    }
    out += "], \"n\": " + std::to_string(r.n) + "}\n";
    return out;
}

}  // namespace emovid
