#include "emovid/ingest.hpp"
#include "emovid/rng.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <functional>

using namespace emovid;
using emovid::test::TempDir;

namespace {

std::string expect_error(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.what();
    }
    ADD_FAILURE() << "expected emovid::error";
    return {};
}

std::string frame_file(std::size_t frames, std::size_t variants, std::size_t dims) {
    std::string s = "frame,variant," + feature_header(dims) + "\n";
    for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t v = 0; v < variants; ++v) {
            s += std::to_string(t) + "," + std::to_string(v);
            for (std::size_t j = 0; j < dims; ++j) s += "," + std::to_string(t * 100 + v * 10 + j);
            s += "\n";
        }
    }
    return s;
}

}  // namespace

TEST(Manifest, ParsesWellFormedLines) {
    TempDir dir("manifest");
    csv::write_file(dir / "a.csv", "f0\n1\n");
    csv::write_file(dir / "m.jsonl",
                    "{\"id\": \"v1\", \"split\": \"train\", \"label\": \"Happy\", \"streams\": {\"s\": \"a.csv\"}}\n"
                    "{\"id\": \"v2\", \"split\": \"val\", \"label\": \"sad\", \"streams\": {\"s\": \"a.csv\"}}\n"
                    "\n"
                    "{\"id\": \"v3\", \"split\": \"test\", \"label\": null, \"streams\": {\"s\": \"a.csv\"}}\n");
    const auto m = load_manifest(dir / "m.jsonl");
    ASSERT_EQ(m.entries.size(), 3u);
    EXPECT_EQ(m.entries[0].video_id, "v1");
    EXPECT_EQ(m.entries[1].label, Emotion::Sad);
    EXPECT_FALSE(m.entries[2].label.has_value());
    EXPECT_EQ(m.entries[2].streams.at("s"), dir / "a.csv");
}

TEST(Manifest, BadSplitReportsLine) {
    TempDir dir("manifest");
    csv::write_file(dir / "a.csv", "f0\n1\n");
    csv::write_file(dir / "m.jsonl",
                    "{\"id\": \"v1\", \"split\": \"train\", \"label\": \"Happy\", \"streams\": {\"s\": \"a.csv\"}}\n"
                    "{\"id\": \"v2\", \"split\": \"validation\", \"label\": \"Sad\", \"streams\": {\"s\": \"a.csv\"}}\n");
    const auto msg = expect_error([&] { load_manifest(dir / "m.jsonl"); });
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bad split"), std::string::npos) << msg;
}

TEST(Manifest, DuplicateIdRejected) {
    TempDir dir("manifest");
    csv::write_file(dir / "a.csv", "f0\n1\n");
    csv::write_file(dir / "m.jsonl",
                    "{\"id\": \"vid_007\", \"split\": \"train\", \"label\": \"Fear\", \"streams\": {\"s\": \"a.csv\"}}\n"
                    "{\"id\": \"vid_007\", \"split\": \"train\", \"label\": \"Fear\", \"streams\": {\"s\": \"a.csv\"}}\n");
    const auto msg = expect_error([&] { load_manifest(dir / "m.jsonl"); });
    EXPECT_NE(msg.find("duplicate id 'vid_007'"), std::string::npos) << msg;
}

TEST(Manifest, MalformedRecords) {
    TempDir dir("manifest");
    csv::write_file(dir / "a.csv", "f0\n1\n");
    auto bad = [&](const std::string& line) {
        csv::write_file(dir / "m.jsonl", line + "\n");
        return expect_error([&] { load_manifest(dir / "m.jsonl"); });
    };
    EXPECT_NE(bad("not json").find("line 1"), std::string::npos);
    EXPECT_NE(bad("{\"split\": \"train\", \"label\": \"Happy\", \"streams\": {}}").find("id"), std::string::npos);
    EXPECT_NE(bad("{\"id\": \"x\", \"split\": \"train\", \"label\": null, \"streams\": {}}").find("label"),
              std::string::npos);
    EXPECT_NE(bad("{\"id\": \"x\", \"split\": \"train\", \"label\": \"Joy\", \"streams\": {}}").find("Joy"),
              std::string::npos);
    EXPECT_NE(bad("{\"id\": \"x\", \"split\": \"test\", \"label\": null, \"streams\": {\"s\": \"missing.csv\"}}")
                  .find("not found"),
              std::string::npos);
}

TEST(FrameFeatures, ShapeEcho) {
    TempDir dir("frames");
    csv::write_file(dir / "v.csv", frame_file(10, 1, 1024));
    const auto seq = load_frame_features(dir / "v.csv");
    EXPECT_EQ(seq.frames(), 10u);
    EXPECT_EQ(seq.variants(), 1u);
    EXPECT_EQ(seq.dims(), 1024u);
    EXPECT_EQ(seq.video_id(), "v");
}

TEST(FrameFeatures, EighteenVariantsPerFrame) {
    TempDir dir("frames");
    csv::write_file(dir / "v.csv", frame_file(5, 18, 4));
    const auto seq = load_frame_features(dir / "v.csv", 4);
    EXPECT_EQ(seq.frames(), 5u);
    EXPECT_EQ(seq.variants(), 18u);
    EXPECT_EQ(seq.at(3, 17, 2), 3 * 100 + 17 * 10 + 2);
}

TEST(FrameFeatures, UnsortedRowsAreSorted) {
    TempDir dir("frames");
    csv::write_file(dir / "v.csv", "frame,variant,f0\n1,1,4\n0,1,2\n1,0,3\n0,0,1\n");
    const auto seq = load_frame_features(dir / "v.csv");
    ASSERT_EQ(seq.frames(), 2u);
    EXPECT_EQ(std::vector<double>(seq.values().begin(), seq.values().end()), (std::vector<double>{1, 2, 3, 4}));
}

TEST(FrameFeatures, Rejections) {
    TempDir dir("frames");
    auto load = [&](const std::string& text, std::optional<std::size_t> dim = std::nullopt) {
        csv::write_file(dir / "v.csv", text);
        return expect_error([&] { load_frame_features(dir / "v.csv", dim); });
    };
    EXPECT_NE(load("frame,variant,f0,f1\n0,0,1\n").find("ragged"), std::string::npos);
    EXPECT_NE(load("frame,variant,f0\n0,0,nan\n").find("non-finite"), std::string::npos);
    EXPECT_NE(load("frame,variant,f0\n0,0,inf\n").find("non-finite"), std::string::npos);
    EXPECT_NE(load("frame,variant,f0\n0,0,1\n0,1,1\n1,0,1\n").find("rectangular"), std::string::npos);
    EXPECT_NE(load("frame,variant,f0\n0,0,1\n0,0,2\n").find("rectangular"), std::string::npos);
    EXPECT_NE(load("frame,variant,f0\n0,0,1\n", 3).find("expected 3"), std::string::npos);
    EXPECT_NE(load("frame,variant,f1\n0,0,1\n").find("header"), std::string::npos);
    EXPECT_NE(load("frame,variant,f0\n0,0,abc\n").find("malformed"), std::string::npos);
}

TEST(FrameFeatures, ScientificNotationAndGaps) {
    TempDir dir("frames");
    // Frames 0 and 5 only: dropped frames are simply absent.
    csv::write_file(dir / "v.csv", "frame,variant,f0,f1\n5,0,1e-3,-2.5E2\n0,0,+3,4\n");
    const auto seq = load_frame_features(dir / "v.csv");
    ASSERT_EQ(seq.frames(), 2u);
    EXPECT_EQ(seq.at(0, 0, 0), 3.0);
    EXPECT_EQ(seq.at(1, 0, 0), 1e-3);
    EXPECT_EQ(seq.at(1, 0, 1), -250.0);
}

TEST(AudioFeatures, SingleRow) {
    TempDir dir("audio");
    std::vector<double> v(1582);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * static_cast<double>(i);
    write_audio_features(dir / "a.csv", v);
    EXPECT_EQ(load_audio_features(dir / "a.csv").size(), 1582u);

    csv::write_file(dir / "b.csv", "f0,f1,f2\n1,2,3\n");
    EXPECT_EQ(load_audio_features(dir / "b.csv"), (std::vector<double>{1, 2, 3}));

    csv::write_file(dir / "c.csv", "f0,f1,f2\n1,2,3\n4,5,6\n");
    EXPECT_NE(expect_error([&] { load_audio_features(dir / "c.csv"); }).find("exactly one data row"),
              std::string::npos);
    csv::write_file(dir / "d.csv", "f0,f1,f2\n");
    EXPECT_THROW(load_audio_features(dir / "d.csv"), error);
}

TEST(FrameFeatures, WriteReadRoundTripIsBitExact) {
    TempDir dir("roundtrip");
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t t = 1 + rng.uniform_index(12);
        const std::size_t v = 1 + rng.uniform_index(3);
        const std::size_t d = 1 + rng.uniform_index(9);
        std::vector<double> values(t * v * d);
        for (auto& x : values) x = std::ldexp(rng.normal(), static_cast<int>(rng.uniform_index(80)) - 40);
        FrameFeatureSequence seq("clip", t, v, d, values);
        write_frame_features(dir / "clip.csv", seq);
        EXPECT_EQ(load_frame_features(dir / "clip.csv"), seq);
    }
}

TEST(LoadStream, DetectsKindFromHeader) {
    TempDir dir("stream");
    csv::write_file(dir / "f.csv", "frame,variant,f0\n0,0,1\n");
    csv::write_file(dir / "a.csv", "f0\n2\n");
    EXPECT_TRUE(std::holds_alternative<FrameFeatureSequence>(load_stream(dir / "f.csv")));
    EXPECT_TRUE(std::holds_alternative<std::vector<double>>(load_stream(dir / "a.csv")));
}
