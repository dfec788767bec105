#pragma once

// L2-regularized L1-hinge linear SVM trained by dual coordinate descent,
// one-vs-rest over the seven emotion classes, plus stratified k-fold
// selection of the regularization constant C.
//
//   primal:  min_w  1/2 ||w||^2 + C sum_i max(0, 1 - y_i w.x_i)
//   dual:    max_a  sum_i a_i - 1/2 ||sum_i a_i y_i x_i||^2,  0 <= a_i <= C
//
// The bias is an appended constant-1 feature and is regularized like any
// other weight.

#include "emovid/core.hpp"
#include "emovid/normalize.hpp"
#include "emovid/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace emovid {

struct SvmTrainConfig {
    double C = 1.0;
    double tolerance = 1e-4;
    std::size_t max_epochs = 1000;
    std::uint64_t seed = 0;
    bool bias = true;

    void validate() const {
        if (!(C > 0.0) || !std::isfinite(C)) throw error("SVM regularization constant C must be positive");
        if (!(tolerance > 0.0)) throw error("SVM tolerance must be positive");
        if (max_epochs == 0) throw error("SVM max_epochs must be positive");
    }

    friend bool operator==(const SvmTrainConfig&, const SvmTrainConfig&) = default;
};

/// Per-epoch solver diagnostics, filled when a trace is passed to train_binary.
struct SolverTrace {
    std::vector<double> dual_objective;  // after each epoch, plus the initial 0
    std::vector<double> max_violation;   // max |projected gradient| seen in each epoch
    double alpha_min = std::numeric_limits<double>::infinity();
    double alpha_max = -std::numeric_limits<double>::infinity();
    /// When set, a decrease of the dual objective between epochs throws.
    bool check_monotone = false;
};

struct BinarySolution {
    std::vector<double> w;      // length D (+1 with bias, bias last)
    std::vector<double> alpha;  // dual variables, one per sample
    std::size_t epochs = 0;
    bool converged = false;
};

namespace detail {

inline double dot_augmented(std::span<const double> w, std::span<const double> x, bool bias) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    if (bias) s += w[x.size()];
    return s;
}

inline void check_binary_problem(const Matrix& X, std::span<const int> y) {
    if (X.rows() == 0) throw error("train_binary: no samples");
    if (y.size() != X.rows()) {
        throw error("train_binary: " + std::to_string(X.rows()) + " samples but " + std::to_string(y.size()) +
                    " labels");
    }
    if (!all_finite(X.data())) throw error("train_binary: non-finite feature value");
    for (int v : y) {
        if (v != 1 && v != -1) throw error("train_binary: labels must be +1 or -1");
    }
}

}  // namespace detail

inline double decision_value(std::span<const double> w, std::span<const double> x, bool bias) {
    return detail::dot_augmented(w, x, bias);
}

/// 1/2 ||w||^2 + C sum_i max(0, 1 - y_i w.x_i)
inline double primal_objective(std::span<const double> w, const Matrix& X, std::span<const int> y, double C,
                               bool bias) {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    double loss = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        loss += std::max(0.0, 1.0 - y[i] * detail::dot_augmented(w, X.row(i), bias));
    }
    return 0.5 * reg + C * loss;
}

/// sum_i a_i - 1/2 ||w||^2 for w = sum_i a_i y_i x_i.
inline double dual_objective(std::span<const double> alpha, std::span<const double> w) {
    double a = 0.0;
    for (double v : alpha) a += v;
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return a - 0.5 * reg;
}

inline BinarySolution train_binary(const Matrix& X, std::span<const int> y, const SvmTrainConfig& cfg,
                                   SolverTrace* trace = nullptr) {
    cfg.validate();
    detail::check_binary_problem(X, y);
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    const double C = cfg.C;

    BinarySolution sol;
    sol.w.assign(d + (cfg.bias ? 1 : 0), 0.0);
    sol.alpha.assign(n, 0.0);

    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = cfg.bias ? 1.0 : 0.0;
        for (double v : X.row(i)) s += v * v;
        qd[i] = s;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.seed);

    if (trace) trace->dual_objective.push_back(0.0);

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double max_violation = 0.0;
        for (std::size_t i : order) {
            const auto xi = X.row(i);
            const double yi = y[i];
            const double grad = yi * detail::dot_augmented(sol.w, xi, cfg.bias) - 1.0;
            const double a = sol.alpha[i];

            double pg = grad;
            if (a <= 0.0) {
                pg = std::min(grad, 0.0);
            } else if (a >= C) {
                pg = std::max(grad, 0.0);
            }
            max_violation = std::max(max_violation, std::abs(pg));
            if (pg == 0.0) continue;

            // Exact maximizer along the coordinate, clipped to the box.
            const double next = qd[i] > 0.0 ? std::clamp(a - grad / qd[i], 0.0, C) : (grad < 0.0 ? C : 0.0);
            const double step = (next - a) * yi;
            if (step == 0.0) continue;
            sol.alpha[i] = next;
            for (std::size_t j = 0; j < d; ++j) sol.w[j] += step * xi[j];
            if (cfg.bias) sol.w[d] += step;
        }
        sol.epochs = epoch + 1;

        if (trace) {
            const double dual = dual_objective(sol.alpha, sol.w);
            if (trace->check_monotone) {
                const double prev = trace->dual_objective.back();
                if (dual < prev - 1e-12 * (1.0 + std::abs(prev))) {
                    throw error("dual objective decreased in epoch " + std::to_string(epoch + 1));
                }
            }
            trace->dual_objective.push_back(dual);
            trace->max_violation.push_back(max_violation);
            const auto [lo, hi] = std::minmax_element(sol.alpha.begin(), sol.alpha.end());
            trace->alpha_min = std::min(trace->alpha_min, *lo);
            trace->alpha_max = std::max(trace->alpha_max, *hi);
        }

        if (max_violation < cfg.tolerance) {
            sol.converged = true;
            break;
        }
    }
    return sol;
}

/// One weight vector per class plus the normalization fitted for its inputs.
struct LinearSvmModel {
    static constexpr int kFormatVersion = 1;

    std::array<std::vector<double>, kNumClasses> weights;
    SvmTrainConfig config;
    NormalizationParams normalization;

    /// Width of the raw (pre-bias) descriptors the model accepts.
    std::size_t input_dims() const noexcept { return weights[0].size() - (config.bias ? 1 : 0); }

    friend bool operator==(const LinearSvmModel&, const LinearSvmModel&) = default;
};

/// Seven independent class-vs-rest problems; class c uses seed cfg.seed + c.
/// X is used as given (no normalization).
inline LinearSvmModel train_ovr(const Matrix& X, std::span<const Emotion> labels, const SvmTrainConfig& cfg) {
    cfg.validate();
    if (X.rows() == 0) throw error("train_ovr: no samples");
    if (labels.size() != X.rows()) {
        throw error("train_ovr: " + std::to_string(X.rows()) + " samples but " + std::to_string(labels.size()) +
                    " labels");
    }
    LinearSvmModel model;
    model.config = cfg;
    std::vector<int> y(labels.size());
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        for (std::size_t i = 0; i < labels.size(); ++i) y[i] = index_of(labels[i]) == c ? 1 : -1;
        auto class_cfg = cfg;
        class_cfg.seed = cfg.seed + c;
        model.weights[c] = train_binary(X, y, class_cfg).w;
    }
    return model;
}

/// Fits the normalization chain on X, then the OvR SVM on the normalized data.
inline LinearSvmModel fit_model(const Matrix& X, std::span<const Emotion> labels, const SvmTrainConfig& cfg,
                                const NormalizationToggles& toggles = {}) {
    if (X.rows() == 0) throw error("fit_model: no samples");
    auto params = fit_normalization(X, toggles);
    auto model = train_ovr(params.apply(X), labels, cfg);
    model.normalization = std::move(params);
    return model;
}

/// Raw decision values w_c . [normalize(x), 1] for every row.
inline ScoreMatrix decision_scores(const LinearSvmModel& model, const Matrix& X, std::vector<std::string> ids) {
    if (ids.size() != X.rows()) {
        throw error("decision_scores: " + std::to_string(X.rows()) + " rows but " + std::to_string(ids.size()) +
                    " ids");
    }
    if (X.rows() > 0 && X.cols() != model.input_dims()) {
        throw error("decision_scores: descriptors have " + std::to_string(X.cols()) + " dims, model expects " +
                    std::to_string(model.input_dims()));
    }
    ScoreMatrix out;
    out.video_ids = std::move(ids);
    out.scores.reserve(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const auto x = model.normalization.apply(X.row(i));
        ScoreRow row{};
        for (std::size_t c = 0; c < kNumClasses; ++c) row[c] = decision_value(model.weights[c], x, model.config.bias);
        out.scores.push_back(row);
    }
    return out;
}

inline ScoreMatrix decision_scores(const LinearSvmModel& model, const Matrix& X) {
    std::vector<std::string> ids(X.rows());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(i);
    return decision_scores(model, X, std::move(ids));
}

/// Smallest class index attaining the row maximum.
inline Emotion argmax_class(const ScoreRow& row) noexcept {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
        if (row[c] > row[best]) best = c;
    }
    return static_cast<Emotion>(best);
}

/// {2^k : k = -8, -6, ..., 6}
inline std::vector<double> default_c_grid() {
    std::vector<double> grid;
    for (int k = -8; k <= 6; k += 2) grid.push_back(std::ldexp(1.0, k));
    return grid;
}

/// Stratified fold assignment. Within each class (in canonical order) the
/// members, sorted by id, are shuffled with the seeded generator and dealt
/// round-robin; the dealing position carries over between classes so fold
/// sizes differ by at most one.
inline std::vector<std::size_t> stratified_folds(std::span<const Emotion> labels, std::span<const std::string> ids,
                                                 std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw error("folds must be >= 2 (got " + std::to_string(folds) + ")");
    if (labels.size() < folds) {
        throw error("cross-validation needs at least as many samples as folds (" + std::to_string(labels.size()) +
                    " < " + std::to_string(folds) + ")");
    }
    if (ids.size() != labels.size()) throw error("stratified_folds: ids and labels differ in length");
    std::vector<std::size_t> assignment(labels.size());
    Rng rng(seed);
    std::size_t next_fold = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (index_of(labels[i]) == c) members.push_back(i);
        }
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
        rng.shuffle(std::span<std::size_t>(members));
        for (auto i : members) {
            assignment[i] = next_fold;
            next_fold = (next_fold + 1) % folds;
        }
    }
    return assignment;
}

struct CvRow {
    double C = 0.0;
    double mean_accuracy = 0.0;
    std::vector<double> fold_accuracies;
};

struct CvResult {
    double best_c = 0.0;
    std::vector<CvRow> rows;  // grid order, ascending C
};

/// k-fold selection of C by mean video-level accuracy. Normalization is refit
/// on each fold's training portion. Ties go to the smallest C.
inline CvResult cross_validate_c(const Matrix& X, std::span<const Emotion> labels, std::span<const std::string> ids,
                                 std::vector<double> grid, std::size_t folds, std::uint64_t seed,
                                 const SvmTrainConfig& base = {}, const NormalizationToggles& toggles = {}) {
    if (grid.empty()) throw error("cross_validate_c: empty C grid");
    for (double c : grid) {
        if (!(c > 0.0) || !std::isfinite(c)) throw error("cross_validate_c: grid values must be positive");
    }
    if (labels.size() != X.rows()) throw error("cross_validate_c: labels and samples differ in length");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto assignment = stratified_folds(labels, ids, folds, seed);

    struct Fold {
        Matrix train;
        std::vector<Emotion> train_labels;
        Matrix held_out;
        std::vector<Emotion> held_labels;
    };
    std::vector<Fold> data(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        Matrix train_raw;
        Matrix held_raw;
        for (std::size_t i = 0; i < X.rows(); ++i) {
            if (assignment[i] == f) {
                held_raw.push_row(X.row(i));
                data[f].held_labels.push_back(labels[i]);
            } else {
                train_raw.push_row(X.row(i));
                data[f].train_labels.push_back(labels[i]);
            }
        }
        auto params = fit_normalization(train_raw, toggles);
        data[f].train = params.apply(train_raw);
        data[f].held_out = params.apply(held_raw);
    }

    CvResult result;
    double best = -1.0;
    for (double c : grid) {
        CvRow row{c, 0.0, {}};
        for (const auto& fold : data) {
            auto cfg = base;
            cfg.C = c;
            const auto model = train_ovr(fold.train, fold.train_labels, cfg);
            const auto scores = decision_scores(model, fold.held_out);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < scores.size(); ++i) {
                if (argmax_class(scores.scores[i]) == fold.held_labels[i]) ++correct;
            }
            row.fold_accuracies.push_back(static_cast<double>(correct) / static_cast<double>(scores.size()));
        }
        row.mean_accuracy = std::accumulate(row.fold_accuracies.begin(), row.fold_accuracies.end(), 0.0) /
                            static_cast<double>(folds);
        if (row.mean_accuracy > best + 1e-12) {
            best = row.mean_accuracy;
            result.best_c = c;
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

}  // namespace emovid
