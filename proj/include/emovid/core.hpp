#pragma once

// Domain types shared by every stage of the pipeline: the emotion label
// universe, frame-feature sequences, video descriptors, score matrices and
// class weights.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace emovid {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kNumClasses = 7;

/// Emotion labels in canonical order. All score columns, weights and
/// reports use this order.
enum class Emotion : std::uint8_t { Angry = 0, Disgust, Fear, Happy, Neutral, Sad, Surprise };

inline constexpr std::array<std::string_view, kNumClasses> kEmotionNames = {
    "Angry", "Disgust", "Fear", "Happy", "Neutral", "Sad", "Surprise"};

inline constexpr std::array<std::string_view, kNumClasses> kEmotionShortNames = {
    "An", "Di", "Fe", "Ha", "Ne", "Sa", "Su"};

constexpr std::size_t index_of(Emotion e) noexcept { return static_cast<std::size_t>(e); }

inline Emotion emotion_at(std::size_t index) {
    if (index >= kNumClasses) {
        throw error("emotion index out of range: " + std::to_string(index));
    }
    return static_cast<Emotion>(index);
}

constexpr std::string_view name_of(Emotion e) noexcept { return kEmotionNames[index_of(e)]; }

/// Case-insensitive lookup of one of the seven canonical names.
inline Emotion label_from_name(std::string_view name) {
    auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; };
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        const auto candidate = kEmotionNames[i];
        if (candidate.size() == name.size() &&
            std::equal(name.begin(), name.end(), candidate.begin(),
                       [&](char a, char b) { return lower(a) == lower(b); })) {
            return static_cast<Emotion>(i);
        }
    }
    throw error("unknown emotion label: '" + std::string(name) + "'");
}

enum class Split : std::uint8_t { train, val, test };

inline std::string_view name_of(Split s) noexcept {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

inline Split split_from_name(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    throw error("unknown split: '" + std::string(name) + "'");
}

/// Dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) {
                throw error("ragged matrix: row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " columns, expected " +
                            std::to_string(m.cols_));
            }
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<const double> data() const noexcept { return data_; }

    /// Appends a row; the first row fixes the column count.
    void push_row(std::span<const double> values) {
        if (rows_ == 0 && data_.empty()) {
            cols_ = values.size();
        } else if (values.size() != cols_) {
            throw error("row length " + std::to_string(values.size()) + " does not match matrix width " +
                        std::to_string(cols_));
        }
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline bool all_finite(std::span<const double> values) noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

/// Per-video frame features, shape T frames x V variants x d dims.
/// Storage is frame-major, then variant, then dimension.
class FrameFeatureSequence {
  public:
    FrameFeatureSequence(std::string video_id, std::size_t frames, std::size_t variants, std::size_t dims,
                         std::vector<double> values)
        : video_id_(std::move(video_id)), frames_(frames), variants_(variants), dims_(dims), values_(std::move(values)) {
        if (frames_ == 0 || variants_ == 0 || dims_ == 0) {
            throw error("frame feature sequence '" + video_id_ + "' must have T, V, d >= 1 (got " +
                        std::to_string(frames_) + "x" + std::to_string(variants_) + "x" + std::to_string(dims_) + ")");
        }
        if (values_.size() != frames_ * variants_ * dims_) {
            throw error("frame feature sequence '" + video_id_ + "' has " + std::to_string(values_.size()) +
                        " values, expected " + std::to_string(frames_ * variants_ * dims_));
        }
        if (!all_finite(values_)) {
            throw error("frame feature sequence '" + video_id_ + "' contains a non-finite value");
        }
    }

    /// Single-variant sequence from a list of frame vectors.
    static FrameFeatureSequence from_frames(std::string video_id, const std::vector<std::vector<double>>& frames) {
        if (frames.empty()) throw error("frame feature sequence '" + video_id + "' has no frames");
        const std::size_t d = frames.front().size();
        std::vector<double> values;
        values.reserve(frames.size() * d);
        for (const auto& f : frames) {
            if (f.size() != d) throw error("frame feature sequence '" + video_id + "' has ragged frames");
            values.insert(values.end(), f.begin(), f.end());
        }
        return {std::move(video_id), frames.size(), 1, d, std::move(values)};
    }

    const std::string& video_id() const noexcept { return video_id_; }
    std::size_t frames() const noexcept { return frames_; }
    std::size_t variants() const noexcept { return variants_; }
    std::size_t dims() const noexcept { return dims_; }

    std::span<const double> vector(std::size_t frame, std::size_t variant = 0) const noexcept {
        return {values_.data() + (frame * variants_ + variant) * dims_, dims_};
    }
    double at(std::size_t frame, std::size_t variant, std::size_t dim) const noexcept {
        return values_[(frame * variants_ + variant) * dims_ + dim];
    }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const FrameFeatureSequence&, const FrameFeatureSequence&) = default;

  private:
    std::string video_id_;
    std::size_t frames_;
    std::size_t variants_;
    std::size_t dims_;
    std::vector<double> values_;
};

/// One stream of a video: a frame sequence or a single precomputed vector (audio).
using StreamData = std::variant<FrameFeatureSequence, std::vector<double>>;

struct VideoSample {
    std::string video_id;
    Split split = Split::train;
    std::optional<Emotion> label;
    std::map<std::string, StreamData> streams;
};

struct DescriptorBlock {
    std::string aggregator;
    std::size_t length = 0;

    friend bool operator==(const DescriptorBlock&, const DescriptorBlock&) = default;
};

/// Fixed-length video-level feature vector with the blocks it was built from.
struct VideoDescriptor {
    std::string video_id;
    std::vector<double> features;
    std::vector<DescriptorBlock> provenance;

    friend bool operator==(const VideoDescriptor&, const VideoDescriptor&) = default;
};

using ScoreRow = std::array<double, kNumClasses>;

/// Per-video, per-class scores. Row order matches video_ids.
struct ScoreMatrix {
    std::vector<std::string> video_ids;
    std::vector<ScoreRow> scores;

    std::size_t size() const noexcept { return scores.size(); }

    void check_consistent() const {
        if (video_ids.size() != scores.size()) {
            throw error("score matrix has " + std::to_string(video_ids.size()) + " ids but " +
                        std::to_string(scores.size()) + " rows");
        }
    }

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;
};

/// Seven nonnegative multipliers summing to one.
class ClassWeights {
  public:
    static constexpr double kSumTolerance = 1e-12;

    explicit ClassWeights(const std::array<double, kNumClasses>& weights) : weights_(weights) {
        double sum = 0.0;
        for (double w : weights_) {
            if (!std::isfinite(w) || w < 0.0) throw error("class weights must be finite and nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kSumTolerance) {
            throw error("class weights must sum to 1 (sum = " + std::to_string(sum) + ")");
        }
    }

    static ClassWeights uniform() {
        std::array<double, kNumClasses> w{};
        w.fill(1.0 / static_cast<double>(kNumClasses));
        return ClassWeights(w);
    }

    const std::array<double, kNumClasses>& values() const noexcept { return weights_; }
    double operator[](std::size_t c) const noexcept { return weights_[c]; }
    double operator[](Emotion e) const noexcept { return weights_[index_of(e)]; }

  private:
    std::array<double, kNumClasses> weights_;
};

}  // namespace emovid
