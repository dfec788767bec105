#pragma once

// Gaussian-cluster stand-in for per-frame CNN features.
//
// Per stream and class c a centroid mu_c is drawn uniformly on the sphere of
// radius s / sqrt(2), so the expected distance between two centroids is
// about s. A video of class c gets an offset ~ N(0, within_video_sigma^2 I);
// each frame (and each variant of it) is mu_c + offset + N(0, frame_sigma^2 I).

#include "emovid/core.hpp"
#include "emovid/csv.hpp"
#include "emovid/ingest.hpp"
#include "emovid/rng.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace emovid {

struct SynthConfig {
    std::size_t dim = 16;
    std::size_t frames_min = 8;
    std::size_t frames_max = 16;
    std::size_t variants = 1;
    double class_separation = 10.0;
    double within_video_sigma = 1.0;
    double frame_sigma = 1.0;
    /// counts[split][class]
    std::array<std::array<std::size_t, kNumClasses>, 3> counts{};
    std::uint64_t seed = 0;
    /// Number of frame-feature streams, named stream0, stream1, ...
    std::size_t streams = 1;
    /// Dimension of an extra single-vector "audio" stream; 0 disables it.
    std::size_t audio_dim = 0;

    void validate() const {
        if (dim == 0) throw error("synth: dim must be >= 1");
        if (frames_min == 0 || frames_max < frames_min) throw error("synth: need 1 <= frames_min <= frames_max");
        if (variants == 0) throw error("synth: variants must be >= 1");
        if (!(class_separation >= 0.0) || !(within_video_sigma >= 0.0) || !(frame_sigma >= 0.0)) {
            throw error("synth: separation and sigmas must be >= 0");
        }
        if (streams == 0 && audio_dim == 0) throw error("synth: at least one stream is required");
    }

    void set_counts(Split split, std::size_t per_class) { counts[static_cast<std::size_t>(split)].fill(per_class); }
    void set_counts(Split split, const std::array<std::size_t, kNumClasses>& per_class) {
        counts[static_cast<std::size_t>(split)] = per_class;
    }

    std::vector<std::string> stream_names() const {
        std::vector<std::string> names;
        for (std::size_t s = 0; s < streams; ++s) names.push_back("stream" + std::to_string(s));
        if (audio_dim > 0) names.emplace_back("audio");
        return names;
    }
};

/// Parses a JSON synth config; every field is optional. `counts` maps split
/// names to a single per-class number or an array of 7.
inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig cfg;
    try {
        cfg.dim = j.value("dim", cfg.dim);
        if (j.contains("frames")) {
            const auto& f = j.at("frames");
            if (!f.is_array() || f.size() != 2) throw error("synth: 'frames' must be [min, max]");
            cfg.frames_min = f[0].get<std::size_t>();
            cfg.frames_max = f[1].get<std::size_t>();
        }
        cfg.variants = j.value("variants", cfg.variants);
        cfg.class_separation = j.value("class_separation", cfg.class_separation);
        cfg.within_video_sigma = j.value("within_video_sigma", cfg.within_video_sigma);
        cfg.frame_sigma = j.value("frame_sigma", cfg.frame_sigma);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.streams = j.value("streams", cfg.streams);
        cfg.audio_dim = j.value("audio_dim", cfg.audio_dim);
        if (j.contains("counts")) {
            for (const auto& [split, value] : j.at("counts").items()) {
                const auto s = split_from_name(split);
                if (value.is_number_unsigned()) {
                    cfg.set_counts(s, value.get<std::size_t>());
                } else if (value.is_array() && value.size() == kNumClasses) {
                    std::array<std::size_t, kNumClasses> per{};
                    for (std::size_t c = 0; c < kNumClasses; ++c) per[c] = value[c].get<std::size_t>();
                    cfg.set_counts(s, per);
                } else {
                    throw error("synth: counts for '" + split + "' must be a nonnegative integer or 7 integers");
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("synth config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

struct SynthDataset {
    SynthConfig config;
    /// centroids[stream][class], stream order as in config.stream_names()
    std::vector<std::array<std::vector<double>, kNumClasses>> centroids;
    std::vector<VideoSample> samples;
};

namespace detail {

inline std::vector<double> sphere_point(Rng& rng, std::size_t dim, double radius) {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    const double scale = radius / std::sqrt(norm2);
    for (auto& x : v) x *= scale;
    return v;
}

}  // namespace detail

/// Generates the dataset in memory. Videos are interleaved across classes
/// within each split; ids are vid_00000, vid_00001, ...
inline SynthDataset generate_samples(const SynthConfig& cfg) {
    cfg.validate();
    SynthDataset ds;
    ds.config = cfg;
    const auto names = cfg.stream_names();
    const double radius = cfg.class_separation / std::sqrt(2.0);
    for (std::size_t s = 0; s < names.size(); ++s) {
        Rng rng(mix_seed(cfg.seed, "centroids/" + names[s]));
        const std::size_t dim = names[s] == "audio" ? cfg.audio_dim : cfg.dim;
        std::array<std::vector<double>, kNumClasses> mus;
        for (auto& mu : mus) mu = detail::sphere_point(rng, dim, radius);
        ds.centroids.push_back(std::move(mus));
    }

    std::size_t video_index = 0;
    for (auto split : {Split::train, Split::val, Split::test}) {
        auto remaining = cfg.counts[static_cast<std::size_t>(split)];
        bool any = true;
        while (any) {
            any = false;
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                if (remaining[c] == 0) continue;
                --remaining[c];
                any = true;

                char id[32];
                std::snprintf(id, sizeof id, "vid_%05zu", video_index);
                VideoSample sample{id, split, static_cast<Emotion>(c), {}};
                Rng rng(mix_seed(cfg.seed, video_index));
                const std::size_t frames =
                    cfg.frames_min + static_cast<std::size_t>(rng.uniform_index(cfg.frames_max - cfg.frames_min + 1));
                for (std::size_t s = 0; s < names.size(); ++s) {
                    const auto& mu = ds.centroids[s][c];
                    std::vector<double> base(mu.size());
                    for (std::size_t j = 0; j < mu.size(); ++j) base[j] = mu[j] + cfg.within_video_sigma * rng.normal();
                    if (names[s] == "audio") {
                        sample.streams.emplace(names[s], std::move(base));
                        continue;
                    }
                    std::vector<double> values;
                    values.reserve(frames * cfg.variants * mu.size());
                    for (std::size_t t = 0; t < frames; ++t) {
                        for (std::size_t v = 0; v < cfg.variants; ++v) {
                            for (double b : base) values.push_back(b + cfg.frame_sigma * rng.normal());
                        }
                    }
                    sample.streams.emplace(names[s], FrameFeatureSequence(sample.video_id, frames, cfg.variants,
                                                                          mu.size(), std::move(values)));
                }
                ds.samples.push_back(std::move(sample));
                ++video_index;
            }
        }
    }
    return ds;
}

/// Writes the dataset in the ingest formats: `<dir>/manifest.jsonl` and
/// `<dir>/<stream>/<id>.csv`. Returns the manifest path.
inline std::filesystem::path write_dataset(const SynthDataset& ds, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw error("cannot create output directory '" + dir.string() + "': " + ec.message());
    std::string manifest;
    for (const auto& sample : ds.samples) {
        ManifestEntry entry{sample.video_id, sample.split, sample.label, {}};
        for (const auto& [name, data] : sample.streams) {
            const auto path = dir / name / (sample.video_id + ".csv");
            if (const auto* seq = std::get_if<FrameFeatureSequence>(&data)) {
                write_frame_features(path, *seq);
            } else {
                write_audio_features(path, std::get<std::vector<double>>(data));
            }
            entry.streams.emplace(name, path);
        }
        manifest += manifest_record(entry, dir) + "\n";
    }
    const auto manifest_path = dir / "manifest.jsonl";
    csv::write_file(manifest_path, manifest);
    return manifest_path;
}

inline std::filesystem::path generate_dataset(const SynthConfig& cfg, const std::filesystem::path& dir) {
    return write_dataset(generate_samples(cfg), dir);
}

/// Linearly separable binary problem: x ~ N(0, spread^2 I) conditioned on
/// |u.x| >= margin for a random unit normal u, labelled sign(u.x).
struct BinaryProblem {
    Matrix X;
    std::vector<int> y;
    std::vector<double> normal;
};

inline BinaryProblem margin_problem(std::size_t n, std::size_t dim, double margin, std::uint64_t seed,
                                    double spread = 2.0) {
    Rng rng(seed);
    BinaryProblem p;
    p.normal = detail::sphere_point(rng, dim, 1.0);
    std::vector<double> x(dim);
    while (p.X.rows() < n) {
        double proj = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            x[j] = spread * rng.normal();
            proj += x[j] * p.normal[j];
        }
        if (std::abs(proj) < margin) continue;
        p.X.push_row(x);
        p.y.push_back(proj > 0.0 ? 1 : -1);
    }
    return p;
}

}  // namespace emovid
