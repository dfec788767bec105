#include "emovid/ingest.hpp"
#include "emovid/oracle.hpp"
#include "emovid/rng.hpp"
#include "emovid/synth.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>

using namespace emovid;
using emovid::test::TempDir;

namespace {

SynthConfig small_config() {
    SynthConfig cfg;
    cfg.dim = 6;
    cfg.frames_min = 2;
    cfg.frames_max = 5;
    cfg.set_counts(Split::train, 2);
    cfg.set_counts(Split::test, {1, 0, 2, 0, 0, 0, 1});
    cfg.seed = 31;
    return cfg;
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).string()] = csv::read_file(e.path());
    }
    return out;
}

}  // namespace

TEST(Generate, NoiselessFramesEqualCentroid) {
    auto cfg = small_config();
    cfg.within_video_sigma = 0;
    cfg.frame_sigma = 0;
    cfg.variants = 3;
    const auto ds = generate_samples(cfg);
    for (const auto& s : ds.samples) {
        const auto& seq = std::get<FrameFeatureSequence>(s.streams.at("stream0"));
        const auto& mu = ds.centroids[0][index_of(*s.label)];
        for (std::size_t t = 0; t < seq.frames(); ++t) {
            for (std::size_t v = 0; v < seq.variants(); ++v) {
                for (std::size_t j = 0; j < seq.dims(); ++j) EXPECT_EQ(seq.at(t, v, j), mu[j]);
            }
        }
    }
}

TEST(Generate, CountsShapesAndIds) {
    const auto ds = generate_samples(small_config());
    ASSERT_EQ(ds.samples.size(), 14u + 4u);
    EXPECT_EQ(ds.samples[0].video_id, "vid_00000");
    EXPECT_EQ(ds.samples[0].label, Emotion::Angry);
    EXPECT_EQ(ds.samples[1].label, Emotion::Disgust);
    std::array<std::size_t, kNumClasses> test_counts{};
    for (const auto& s : ds.samples) {
        const auto& seq = std::get<FrameFeatureSequence>(s.streams.at("stream0"));
        EXPECT_GE(seq.frames(), 2u);
        EXPECT_LE(seq.frames(), 5u);
        EXPECT_EQ(seq.dims(), 6u);
        if (s.split == Split::test) ++test_counts[index_of(*s.label)];
    }
    EXPECT_EQ(test_counts, (std::array<std::size_t, kNumClasses>{1, 0, 2, 0, 0, 0, 1}));
}

TEST(Generate, CentroidDistancesScaleWithSeparation) {
    SynthConfig cfg;
    cfg.dim = 256;
    cfg.class_separation = 10;
    const auto ds = generate_samples(cfg);
    const auto& mus = ds.centroids[0];
    for (std::size_t a = 0; a < kNumClasses; ++a) {
        double r = 0;
        for (double v : mus[a]) r += v * v;
        EXPECT_NEAR(std::sqrt(r), 10 / std::sqrt(2.0), 1e-9);
        for (std::size_t b = a + 1; b < kNumClasses; ++b) {
            double d = 0;
            for (std::size_t j = 0; j < cfg.dim; ++j) d += (mus[a][j] - mus[b][j]) * (mus[a][j] - mus[b][j]);
            EXPECT_NEAR(std::sqrt(d), 10.0, 1.5);  // near-orthogonal in high dimension
        }
    }
}

TEST(Generate, SameSeedSameBytes) {
    TempDir a("synth_a"), b("synth_b"), c("synth_c");
    auto cfg = small_config();
    cfg.audio_dim = 5;
    cfg.streams = 2;
    generate_dataset(cfg, a.path());
    generate_dataset(cfg, b.path());
    cfg.seed += 1;
    generate_dataset(cfg, c.path());
    const auto ta = read_tree(a.path());
    EXPECT_EQ(ta, read_tree(b.path()));
    EXPECT_NE(ta, read_tree(c.path()));
    EXPECT_EQ(ta.size(), 1 + 3 * 18u);
}

TEST(Generate, RoundTripsThroughIngest) {
    TempDir dir("synth_rt");
    auto cfg = small_config();
    cfg.variants = 2;
    cfg.audio_dim = 4;
    const auto ds = generate_samples(cfg);
    const auto manifest = load_manifest(write_dataset(ds, dir.path()));
    ASSERT_EQ(manifest.entries.size(), ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& want = ds.samples[i];
        const auto got = load_sample(manifest.entries[i]);
        EXPECT_EQ(got.video_id, want.video_id);
        EXPECT_EQ(got.split, want.split);
        EXPECT_EQ(got.label, want.label);
        EXPECT_EQ(got.streams, want.streams);
    }
}

TEST(Generate, UnwritableDirectory) {
    TempDir dir("synth_bad");
    csv::write_file(dir / "file", "x");
    EXPECT_THROW(generate_dataset(small_config(), dir / "file" / "sub"), error);
}

TEST(SynthConfig, FromJson) {
    const auto cfg = synth_config_from_json(nlohmann::json::parse(
        R"({"dim": 4, "frames": [3, 3], "counts": {"train": 2, "val": [1,0,0,0,0,0,1]}, "seed": 9})"));
    EXPECT_EQ(cfg.dim, 4u);
    EXPECT_EQ(cfg.frames_min, 3u);
    EXPECT_EQ(cfg.counts[0][4], 2u);
    EXPECT_EQ(cfg.counts[1][6], 1u);
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_THROW(synth_config_from_json(nlohmann::json::parse(R"({"frame_sigma": -1})")), error);
    EXPECT_THROW(synth_config_from_json(nlohmann::json::parse(R"({"frames": [4, 2]})")), error);
}

TEST(OracleDft, Examples) {
    const auto c = oracle::dft(std::vector<double>(4, 1.5));
    EXPECT_NEAR(c[0].real(), 6.0, 1e-12);
    for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(c[k]), 0.0, 1e-12);
    const auto alt = oracle::dft(std::vector<double>{1, -1, 1, -1});
    EXPECT_NEAR(std::abs(alt[0]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(alt[1]), 0.0, 1e-12);
    EXPECT_NEAR(alt[2].real(), 4.0, 1e-12);
    EXPECT_NEAR(std::abs(alt[3]), 0.0, 1e-12);
}

TEST(OracleDft, Parseval) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> s(1 + rng.uniform_index(64));
        for (auto& v : s) v = rng.normal();
        double time = 0, freq = 0;
        for (double v : s) time += v * v;
        for (const auto& z : oracle::dft(s)) freq += std::norm(z);
        EXPECT_NEAR(time, freq / static_cast<double>(s.size()), 1e-9 * std::max(1.0, time));
    }
}

TEST(MarginProblem, RespectsMargin) {
    const auto p = margin_problem(100, 5, 1.0, 3);
    ASSERT_EQ(p.X.rows(), 100u);
    for (std::size_t i = 0; i < 100; ++i) {
        double proj = 0;
        for (std::size_t j = 0; j < 5; ++j) proj += p.X(i, j) * p.normal[j];
        EXPECT_GE(p.y[i] * proj, 1.0);
    }
}
