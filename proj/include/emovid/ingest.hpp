#pragma once

// Loading of dataset manifests and per-video feature files.
//
// Manifest: JSON lines, one object per video:
//   {"id": "vid_001", "split": "train", "label": "Happy", "streams": {"vgg": "vgg/vid_001.csv"}}
// Stream paths are relative to the manifest's directory.
//
// Frame feature file: CSV with header `frame,variant,f0,...,f{d-1}` and one
// row per (frame, variant). Rows may come in any order.
//
// Audio feature file: CSV with header `f0,...,f{d-1}` and exactly one data row.

#include "emovid/core.hpp"
#include "emovid/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace emovid {

struct ManifestEntry {
    std::string video_id;
    Split split = Split::train;
    std::optional<Emotion> label;
    /// stream name -> resolved file path
    std::map<std::string, std::filesystem::path> streams;
};

struct Manifest {
    std::filesystem::path base_dir;
    std::vector<ManifestEntry> entries;

    std::set<std::string> stream_names() const {
        std::set<std::string> names;
        for (const auto& e : entries) {
            for (const auto& [name, path] : e.streams) names.insert(name);
        }
        return names;
    }

    const ManifestEntry* find(std::string_view id) const {
        for (const auto& e : entries) {
            if (e.video_id == id) return &e;
        }
        return nullptr;
    }
};

namespace detail {

inline ManifestEntry parse_manifest_record(const std::string& line, std::size_t line_no,
                                           const std::filesystem::path& base_dir, bool check_paths) {
    const auto where = "manifest line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw error(where + "invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw error(where + "record must be a JSON object");

    ManifestEntry entry;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
        throw error(where + "missing or non-string 'id'");
    }
    entry.video_id = j["id"].get<std::string>();

    if (!j.contains("split") || !j["split"].is_string()) throw error(where + "missing or non-string 'split'");
    const auto split = j["split"].get<std::string>();
    try {
        entry.split = split_from_name(split);
    } catch (const error&) {
        throw error(where + "bad split '" + split + "' (expected train, val or test)");
    }

    if (j.contains("label") && !j["label"].is_null()) {
        if (!j["label"].is_string()) throw error(where + "'label' must be a string or null");
        try {
            entry.label = label_from_name(j["label"].get<std::string>());
        } catch (const error& e) {
            throw error(where + e.what());
        }
    }
    if (entry.split != Split::test && !entry.label) {
        throw error(where + "video '" + entry.video_id + "' in split " + std::string(name_of(entry.split)) +
                    " must carry a label");
    }

    if (!j.contains("streams") || !j["streams"].is_object()) throw error(where + "missing 'streams' object");
    for (const auto& [name, rel] : j["streams"].items()) {
        if (!rel.is_string()) throw error(where + "stream '" + name + "' path must be a string");
        auto path = base_dir / rel.get<std::string>();
        if (check_paths && !std::filesystem::exists(path)) {
            throw error(where + "stream '" + name + "' file not found: " + path.string());
        }
        entry.streams.emplace(name, std::move(path));
    }
    return entry;
}

}  // namespace detail

/// Parses a JSON-lines manifest. Entry order is file order. Stream paths
/// resolve against `streams_root`, or the manifest's directory when empty.
inline Manifest load_manifest(const std::filesystem::path& path, const std::filesystem::path& streams_root = {},
                              bool check_paths = true) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open manifest '" + path.string() + "'");
    Manifest manifest;
    manifest.base_dir = streams_root.empty() ? path.parent_path() : streams_root;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (csv::trim(line).empty()) continue;
        auto entry = detail::parse_manifest_record(line, line_no, manifest.base_dir, check_paths);
        if (!seen.insert(entry.video_id).second) {
            throw error("manifest line " + std::to_string(line_no) + ": duplicate id '" + entry.video_id + "'");
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

inline std::string manifest_record(const ManifestEntry& entry, const std::filesystem::path& base_dir) {
    nlohmann::ordered_json j;
    j["id"] = entry.video_id;
    j["split"] = std::string(name_of(entry.split));
    j["label"] = entry.label ? nlohmann::ordered_json(std::string(name_of(*entry.label))) : nlohmann::ordered_json();
    nlohmann::ordered_json streams = nlohmann::ordered_json::object();
    for (const auto& [name, p] : entry.streams) {
        streams[name] = p.lexically_relative(base_dir).generic_string();
    }
    j["streams"] = streams;
    return j.dump();
}

namespace detail {

inline std::size_t check_feature_header(std::span<const std::string_view> names, std::size_t first,
                                        const std::filesystem::path& path) {
    for (std::size_t j = first; j < names.size(); ++j) {
        if (names[j] != "f" + std::to_string(j - first)) {
            throw error(path.string() + ": header column " + std::to_string(j) + " is '" + std::string(names[j]) +
                        "', expected 'f" + std::to_string(j - first) + "'");
        }
    }
    if (names.size() == first) throw error(path.string() + ": header declares no feature columns");
    return names.size() - first;
}

}  // namespace detail

/// Loads a frame-feature CSV into a T x V x d sequence.
inline FrameFeatureSequence load_frame_features(const std::filesystem::path& path,
                                                std::optional<std::size_t> expected_dim = std::nullopt,
                                                std::string video_id = {}) {
    if (video_id.empty()) video_id = path.stem().string();
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw error(path.string() + ": empty file");

    const auto header = csv::split(lines.front());
    if (header.size() < 2 || header[0] != "frame" || header[1] != "variant") {
        throw error(path.string() + ": header must start with 'frame,variant'");
    }
    const std::size_t dims = detail::check_feature_header(header, 2, path);
    if (expected_dim && *expected_dim != dims) {
        throw error(path.string() + ": feature dimension " + std::to_string(dims) + " does not match expected " +
                    std::to_string(*expected_dim));
    }
    if (lines.size() < 2) throw error(path.string() + ": no frame rows");

    struct Row {
        long long frame;
        long long variant;
        std::size_t line;
    };
    std::vector<Row> rows;
    std::vector<double> raw;
    rows.reserve(lines.size() - 1);
    raw.reserve((lines.size() - 1) * dims);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv::split(lines[i]);
        const auto where = path.string() + " line " + std::to_string(i + 1) + ": ";
        if (fields.size() != dims + 2) {
            throw error(where + "ragged row with " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(dims + 2));
        }
        try {
            const auto frame = csv::parse_integer(fields[0]);
            const auto variant = csv::parse_integer(fields[1]);
            if (frame < 0 || variant < 0) throw error("negative frame or variant index");
            rows.push_back({frame, variant, i});
            for (std::size_t j = 0; j < dims; ++j) raw.push_back(csv::parse_double(fields[j + 2]));
        } catch (const error& e) {
            throw error(where + e.what());
        }
    }

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(rows[a].frame, rows[a].variant) < std::tie(rows[b].frame, rows[b].variant);
    });

    // Variants must be exactly 0..V-1 for every frame present.
    long long variants = 0;
    while (variants < static_cast<long long>(order.size()) && rows[order[variants]].frame == rows[order[0]].frame) {
        ++variants;
    }
    if (order.size() % static_cast<std::size_t>(variants) != 0) {
        throw error(path.string() + ": missing (frame, variant) combinations; grid is not rectangular");
    }
    const std::size_t frames = order.size() / static_cast<std::size_t>(variants);
    std::vector<double> values;
    values.reserve(raw.size());
    for (std::size_t t = 0; t < frames; ++t) {
        const auto frame = rows[order[t * variants]].frame;
        for (long long v = 0; v < variants; ++v) {
            const auto& r = rows[order[t * variants + v]];
            if (r.frame != frame || r.variant != v) {
                throw error(path.string() + ": missing or duplicate (frame, variant) combination near frame " +
                            std::to_string(frame) + "; grid is not rectangular");
            }
            const auto* src = raw.data() + order[t * variants + v] * dims;
            values.insert(values.end(), src, src + dims);
        }
    }
    return {std::move(video_id), frames, static_cast<std::size_t>(variants), dims, std::move(values)};
}

/// Loads a single-row audio feature CSV.
inline std::vector<double> load_audio_features(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw error(path.string() + ": empty file");
    const auto header = csv::split(lines.front());
    const std::size_t dims = detail::check_feature_header(header, 0, path);
    if (lines.size() != 2) {
        throw error(path.string() + ": expected exactly one data row, found " + std::to_string(lines.size() - 1));
    }
    const auto fields = csv::split(lines[1]);
    if (fields.size() != dims) {
        throw error(path.string() + ": data row has " + std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(dims));
    }
    std::vector<double> values;
    values.reserve(dims);
    try {
        for (auto f : fields) values.push_back(csv::parse_double(f));
    } catch (const error& e) {
        throw error(path.string() + " line 2: " + e.what());
    }
    return values;
}

/// Loads either kind of stream file, telling them apart by the header.
inline StreamData load_stream(const std::filesystem::path& path, std::string video_id = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open '" + path.string() + "'");
    std::string first;
    std::getline(in, first);
    if (csv::trim(first).starts_with("frame")) return load_frame_features(path, std::nullopt, std::move(video_id));
    return load_audio_features(path);
}

inline VideoSample load_sample(const ManifestEntry& entry) {
    VideoSample sample{entry.video_id, entry.split, entry.label, {}};
    for (const auto& [name, path] : entry.streams) {
        sample.streams.emplace(name, load_stream(path, entry.video_id));
    }
    return sample;
}

inline std::string feature_header(std::size_t dims) {
    std::string s;
    for (std::size_t j = 0; j < dims; ++j) {
        if (j) s += ',';
        s += 'f';
        s += std::to_string(j);
    }
    return s;
}

/// Serializes a sequence in the frame-feature CSV format (17 significant digits).
inline std::string frame_features_csv(const FrameFeatureSequence& seq) {
    std::string out = "frame,variant," + feature_header(seq.dims()) + "\n";
    for (std::size_t t = 0; t < seq.frames(); ++t) {
        for (std::size_t v = 0; v < seq.variants(); ++v) {
            out += std::to_string(t);
            out += ',';
            out += std::to_string(v);
            for (double x : seq.vector(t, v)) {
                out += ',';
                out += csv::format_double(x);
            }
            out += '\n';
        }
    }
    return out;
}

inline std::string audio_features_csv(std::span<const double> values) {
    std::string out = feature_header(values.size()) + "\n";
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (j) out += ',';
        out += csv::format_double(values[j]);
    }
    out += '\n';
    return out;
}

inline void write_frame_features(const std::filesystem::path& path, const FrameFeatureSequence& seq) {
    csv::write_file(path, frame_features_csv(seq));
}

inline void write_audio_features(const std::filesystem::path& path, std::span<const double> values) {
    csv::write_file(path, audio_features_csv(values));
}

}  // namespace emovid
