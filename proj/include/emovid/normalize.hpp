#pragma once

// Descriptor normalization chain: per-column range scaling to [-1, 1],
// rootsift over the whole vector, then per-column standardization. Both
// column-wise stages are fit on training descriptors only.

#include "emovid/core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emovid {

namespace detail {

inline void require_width(std::span<const double> x, std::size_t expected, const char* what) {
    if (x.size() != expected) {
        throw error(std::string(what) + ": descriptor has " + std::to_string(x.size()) + " dims, expected " +
                    std::to_string(expected));
    }
}

inline void require_fit_set(const Matrix& train, const char* what) {
    if (train.rows() == 0) throw error(std::string(what) + ": empty training set");
    if (train.cols() == 0) throw error(std::string(what) + ": zero-width descriptors");
}

}  // namespace detail

struct RangeScalerParams {
    std::vector<double> mins;
    std::vector<double> maxs;

    std::size_t dims() const noexcept { return mins.size(); }
    friend bool operator==(const RangeScalerParams&, const RangeScalerParams&) = default;
};

inline RangeScalerParams fit_range_scaler(const Matrix& train) {
    detail::require_fit_set(train, "fit_range_scaler");
    const auto first = train.row(0);
    RangeScalerParams p{{first.begin(), first.end()}, {first.begin(), first.end()}};
    for (std::size_t i = 1; i < train.rows(); ++i) {
        const auto x = train.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) {
            p.mins[j] = std::min(p.mins[j], x[j]);
            p.maxs[j] = std::max(p.maxs[j], x[j]);
        }
    }
    return p;
}

/// y = 2 (x - min) / (max - min) - 1, clipped to [-1, 1]; degenerate columns map to 0.
inline std::vector<double> apply_range_scaler(std::span<const double> x, const RangeScalerParams& p) {
    detail::require_width(x, p.dims(), "apply_range_scaler");
    std::vector<double> y(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double lo = p.mins[j];
        const double hi = p.maxs[j];
        if (!(hi > lo)) {
            y[j] = 0.0;
            continue;
        }
        y[j] = std::clamp(2.0 * (x[j] - lo) / (hi - lo) - 1.0, -1.0, 1.0);
    }
    return y;
}

/// sign(x) * sqrt(|x| / ||x||_1). The zero vector maps to itself.
inline std::vector<double> rootsift(std::span<const double> x) {
    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    std::vector<double> y(x.size(), 0.0);
    if (l1 == 0.0) return y;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double mag = std::sqrt(std::abs(x[j]) / l1);
        y[j] = x[j] < 0.0 ? -mag : mag;
    }
    return y;
}

struct StandardizerParams {
    std::vector<double> means;
    std::vector<double> stds;

    /// Columns with std below this map to 0.
    static constexpr double kDegenerateStd = 1e-12;

    std::size_t dims() const noexcept { return means.size(); }
    friend bool operator==(const StandardizerParams&, const StandardizerParams&) = default;
};

/// Column means and population standard deviations, two-pass.
inline StandardizerParams fit_standardizer(const Matrix& train) {
    detail::require_fit_set(train, "fit_standardizer");
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();
    StandardizerParams p{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = train.row(i);
        for (std::size_t j = 0; j < d; ++j) p.means[j] += x[j];
    }
    for (auto& m : p.means) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = train.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = x[j] - p.means[j];
            p.stds[j] += dev * dev;
        }
    }
    for (auto& s : p.stds) s = std::sqrt(s / static_cast<double>(n));
    return p;
}

inline std::vector<double> apply_standardizer(std::span<const double> x, const StandardizerParams& p) {
    detail::require_width(x, p.dims(), "apply_standardizer");
    std::vector<double> y(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        y[j] = p.stds[j] < StandardizerParams::kDegenerateStd ? 0.0 : (x[j] - p.means[j]) / p.stds[j];
    }
    return y;
}

struct NormalizationToggles {
    bool range_scale = true;
    bool rootsift = true;
    bool standardize = true;

    friend bool operator==(const NormalizationToggles&, const NormalizationToggles&) = default;
};

/// Fitted chain. Absent params mean the stage is skipped.
struct NormalizationParams {
    std::optional<RangeScalerParams> range;
    bool rootsift = false;
    std::optional<StandardizerParams> standardizer;

    /// Identity chain (no stages).
    static NormalizationParams identity() { return {}; }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(x.begin(), x.end());
        if (range) y = apply_range_scaler(y, *range);
        if (rootsift) y = emovid::rootsift(y);
        if (standardizer) y = apply_standardizer(y, *standardizer);
        return y;
    }

    Matrix apply(const Matrix& x) const {
        Matrix out(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto y = apply(x.row(i));
            std::copy(y.begin(), y.end(), out.row(i).begin());
        }
        return out;
    }

    friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

/// Fits each enabled stage on the output of the previous one, train only.
inline NormalizationParams fit_normalization(const Matrix& train, const NormalizationToggles& toggles = {}) {
    detail::require_fit_set(train, "fit_normalization");
    NormalizationParams params;
    Matrix stage = train;
    if (toggles.range_scale) {
        params.range = fit_range_scaler(stage);
        for (std::size_t i = 0; i < stage.rows(); ++i) {
            const auto y = apply_range_scaler(stage.row(i), *params.range);
            std::copy(y.begin(), y.end(), stage.row(i).begin());
        }
    }
    if (toggles.rootsift) {
        params.rootsift = true;
        for (std::size_t i = 0; i < stage.rows(); ++i) {
            const auto y = rootsift(stage.row(i));
            std::copy(y.begin(), y.end(), stage.row(i).begin());
        }
    }
    if (toggles.standardize) params.standardizer = fit_standardizer(stage);
    return params;
}

struct NormalizedSplits {
    Matrix train;
    Matrix others;
    NormalizationParams params;
};

/// Fits on `train` and applies the identical chain to both sets.
inline NormalizedSplits normalize_pipeline(const Matrix& train, const Matrix& others,
                                           const NormalizationToggles& toggles = {}) {
    auto params = fit_normalization(train, toggles);
    if (!others.empty() && others.cols() != train.cols()) {
        throw error("normalize_pipeline: train has " + std::to_string(train.cols()) + " dims but others have " +
                    std::to_string(others.cols()));
    }
    auto train_out = params.apply(train);
    auto others_out = params.apply(others);
    return {std::move(train_out), std::move(others_out), std::move(params)};
}

}  // namespace emovid
