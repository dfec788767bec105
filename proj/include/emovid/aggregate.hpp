#pragma once

// Frame-level to video-level pooling.
//
// Every aggregator maps a T x d sequence (single variant) to a d-vector.
// Descriptors concatenate the configured blocks in order, so D = k * d for
// k aggregators. All pooling except `fft` is invariant to frame order.

#include "emovid/core.hpp"
#include "emovid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emovid {

enum class Aggregator : std::uint8_t { mean, std, min, max, fft };

inline std::string_view name_of(Aggregator a) noexcept {
    switch (a) {
        case Aggregator::mean: return "mean";
        case Aggregator::std: return "std";
        case Aggregator::min: return "min";
        case Aggregator::max: return "max";
        case Aggregator::fft: return "fft";
    }
    return "?";
}

inline Aggregator aggregator_from_name(std::string_view name) {
    for (auto a : {Aggregator::mean, Aggregator::std, Aggregator::min, Aggregator::max, Aggregator::fft}) {
        if (name == name_of(a)) return a;
    }
    throw error("unknown aggregator '" + std::string(name) + "' (expected mean, std, min, max or fft)");
}

struct AggregationConfig {
    std::vector<Aggregator> aggregators;
    bool average_variants = true;

    void validate() const {
        if (aggregators.empty()) throw error("aggregation config needs at least one aggregator");
        for (std::size_t i = 0; i < aggregators.size(); ++i) {
            for (std::size_t j = i + 1; j < aggregators.size(); ++j) {
                if (aggregators[i] == aggregators[j]) {
                    throw error("duplicate aggregator '" + std::string(name_of(aggregators[i])) + "'");
                }
            }
        }
    }

    static AggregationConfig mean_only() { return {{Aggregator::mean}, true}; }
    static AggregationConfig stat() {
        return {{Aggregator::mean, Aggregator::std, Aggregator::min, Aggregator::max}, true};
    }
    /// STAT without the max block.
    static AggregationConfig stat_star() { return {{Aggregator::mean, Aggregator::std, Aggregator::min}, true}; }
    static AggregationConfig stat_star_fft() {
        return {{Aggregator::mean, Aggregator::std, Aggregator::min, Aggregator::fft}, true};
    }
};

/// Collapses the variant axis to its arithmetic mean.
inline FrameFeatureSequence average_variants(const FrameFeatureSequence& seq) {
    if (seq.variants() == 1) return seq;
    const std::size_t d = seq.dims();
    const double inv = 1.0 / static_cast<double>(seq.variants());
    std::vector<double> values(seq.frames() * d, 0.0);
    for (std::size_t t = 0; t < seq.frames(); ++t) {
        double* out = values.data() + t * d;
        for (std::size_t v = 0; v < seq.variants(); ++v) {
            const auto x = seq.vector(t, v);
            for (std::size_t j = 0; j < d; ++j) out[j] += x[j];
        }
        for (std::size_t j = 0; j < d; ++j) out[j] *= inv;
    }
    return {seq.video_id(), seq.frames(), 1, d, std::move(values)};
}

namespace detail {

inline void require_single_variant(const FrameFeatureSequence& seq, std::string_view op) {
    if (seq.variants() != 1) {
        throw error(std::string(op) + " expects one variant per frame (got " + std::to_string(seq.variants()) +
                    "); apply average_variants first");
    }
}

/// Values of dimension j across frames, sorted ascending. Summing in this
/// order makes mean and std independent of frame order, bit for bit.
inline void sorted_column(const FrameFeatureSequence& seq, std::size_t j, std::vector<double>& column) {
    column.resize(seq.frames());
    for (std::size_t t = 0; t < seq.frames(); ++t) column[t] = seq.at(t, 0, j);
    std::sort(column.begin(), column.end());
}

inline double sorted_mean(std::span<const double> sorted) {
    if (sorted.front() == sorted.back()) return sorted.front();
    return std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
}

}  // namespace detail

inline std::vector<double> aggregate_mean(const FrameFeatureSequence& seq) {
    detail::require_single_variant(seq, "aggregate_mean");
    std::vector<double> out(seq.dims());
    std::vector<double> column;
    for (std::size_t j = 0; j < out.size(); ++j) {
        detail::sorted_column(seq, j, column);
        out[j] = detail::sorted_mean(column);
    }
    return out;
}

/// Population standard deviation (divides by T), two-pass.
inline std::vector<double> aggregate_std(const FrameFeatureSequence& seq) {
    detail::require_single_variant(seq, "aggregate_std");
    std::vector<double> out(seq.dims());
    std::vector<double> column;
    for (std::size_t j = 0; j < out.size(); ++j) {
        detail::sorted_column(seq, j, column);
        if (column.front() == column.back()) {
            out[j] = 0.0;
            continue;
        }
        const double mean = detail::sorted_mean(column);
        double acc = 0.0;
        for (double x : column) acc += (x - mean) * (x - mean);
        out[j] = std::sqrt(acc / static_cast<double>(column.size()));
    }
    return out;
}

inline std::vector<double> aggregate_min(const FrameFeatureSequence& seq) {
    detail::require_single_variant(seq, "aggregate_min");
    const auto first = seq.vector(0);
    std::vector<double> out(first.begin(), first.end());
    for (std::size_t t = 1; t < seq.frames(); ++t) {
        const auto x = seq.vector(t);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::min(out[j], x[j]);
    }
    return out;
}

inline std::vector<double> aggregate_max(const FrameFeatureSequence& seq) {
    detail::require_single_variant(seq, "aggregate_max");
    const auto first = seq.vector(0);
    std::vector<double> out(first.begin(), first.end());
    for (std::size_t t = 1; t < seq.frames(); ++t) {
        const auto x = seq.vector(t);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(out[j], x[j]);
    }
    return out;
}

namespace spectral {

/// Unit-circle twiddles e^{-2 pi i m / n} for m in [0, n).
inline std::vector<std::complex<double>> twiddles(std::size_t n) {
    std::vector<std::complex<double>> w(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
        w[m] = {std::cos(angle), std::sin(angle)};
    }
    return w;
}

/// |S[k]| for k in [0, n) of a real sequence of length n. Only bins
/// 0..n/2 are evaluated; the rest follow from conjugate symmetry.
inline void dft_magnitudes(std::span<const double> signal, std::span<const std::complex<double>> table,
                           std::span<double> out) {
    const std::size_t n = signal.size();
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> acc{0.0, 0.0};
        std::size_t m = 0;  // k * t mod n, advanced incrementally
        for (std::size_t t = 0; t < n; ++t) {
            acc += signal[t] * table[m];
            m += k;
            if (m >= n) m -= n;
        }
        out[k] = std::abs(acc);
        if (k != 0 && n - k != k) out[n - k] = out[k];
    }
}

inline std::vector<double> dft_magnitudes(std::span<const double> signal) {
    std::vector<double> out(signal.size());
    const auto table = twiddles(signal.size());
    dft_magnitudes(signal, table, out);
    return out;
}

}  // namespace spectral

/// Per dimension: mean over the T bins of the magnitude of the length-T DFT
/// of that dimension's frame sequence. DC bin included, no padding.
inline std::vector<double> aggregate_fft_mean(const FrameFeatureSequence& seq) {
    detail::require_single_variant(seq, "aggregate_fft_mean");
    const std::size_t n = seq.frames();
    const auto table = spectral::twiddles(n);
    std::vector<double> column(n);
    std::vector<double> magnitudes(n);
    std::vector<double> out(seq.dims());
    for (std::size_t j = 0; j < seq.dims(); ++j) {
        for (std::size_t t = 0; t < n; ++t) column[t] = seq.at(t, 0, j);
        spectral::dft_magnitudes(column, table, magnitudes);
        out[j] = std::accumulate(magnitudes.begin(), magnitudes.end(), 0.0) / static_cast<double>(n);
    }
    return out;
}

inline std::vector<double> aggregate(const FrameFeatureSequence& seq, Aggregator a) {
    switch (a) {
        case Aggregator::mean: return aggregate_mean(seq);
        case Aggregator::std: return aggregate_std(seq);
        case Aggregator::min: return aggregate_min(seq);
        case Aggregator::max: return aggregate_max(seq);
        case Aggregator::fft: return aggregate_fft_mean(seq);
    }
    throw error("unhandled aggregator");
}

inline VideoDescriptor build_video_descriptor(const FrameFeatureSequence& seq, const AggregationConfig& cfg) {
    cfg.validate();
    const bool collapse = cfg.average_variants || seq.variants() == 1;
    if (!collapse) {
        throw error("video '" + seq.video_id() + "' has " + std::to_string(seq.variants()) +
                    " variants per frame but variant averaging is disabled");
    }
    const auto single = average_variants(seq);
    VideoDescriptor desc;
    desc.video_id = seq.video_id();
    desc.features.reserve(cfg.aggregators.size() * seq.dims());
    for (auto a : cfg.aggregators) {
        const auto block = aggregate(single, a);
        desc.features.insert(desc.features.end(), block.begin(), block.end());
        desc.provenance.push_back({std::string(name_of(a)), block.size()});
    }
    return desc;
}

/// Wraps a precomputed per-video vector (e.g. audio features) as a descriptor.
inline VideoDescriptor vector_descriptor(std::string video_id, std::vector<double> values) {
    if (!all_finite(values)) throw error("video '" + video_id + "' has a non-finite feature value");
    const auto n = values.size();
    return {std::move(video_id), std::move(values), {{"vector", n}}};
}

/// Seeded uniform permutation of the frame axis; variants stay attached to their frame.
inline FrameFeatureSequence shuffle_frames(const FrameFeatureSequence& seq, std::uint64_t seed) {
    std::vector<std::size_t> perm(seq.frames());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(perm));
    const std::size_t stride = seq.variants() * seq.dims();
    std::vector<double> values;
    values.reserve(seq.values().size());
    for (auto src : perm) {
        const auto block = seq.values().subspan(src * stride, stride);
        values.insert(values.end(), block.begin(), block.end());
    }
    return {seq.video_id(), seq.frames(), seq.variants(), seq.dims(), std::move(values)};
}

}  // namespace emovid
