#include "emovid/eval.hpp"
#include "emovid/rng.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

using namespace emovid;

namespace {

std::vector<Emotion> random_labels(Rng& rng, std::size_t n) {
    std::vector<Emotion> out(n);
    for (auto& e : out) e = emotion_at(rng.uniform_index(kNumClasses));
    return out;
}

}  // namespace

TEST(Evaluate, Identity) {
    Rng rng(1);
    const auto truths = random_labels(rng, 50);
    const auto r = evaluate(truths, truths);
    EXPECT_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.n, 50u);
    for (std::size_t a = 0; a < kNumClasses; ++a) {
        for (std::size_t b = 0; b < kNumClasses; ++b) {
            if (a != b) {
                EXPECT_EQ(r.confusion[a][b], 0u);
            }
        }
    }
}

TEST(Evaluate, AllHappy) {
    std::vector<Emotion> truths;
    for (std::size_t c = 0; c < kNumClasses; ++c) truths.push_back(emotion_at(c));
    const std::vector<Emotion> preds(7, Emotion::Happy);
    const auto r = evaluate(preds, truths);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0 / 7.0);
    EXPECT_EQ(r.per_class_recall[index_of(Emotion::Happy)], 1.0);
    EXPECT_EQ(r.per_class_recall[0], 0.0);
}

TEST(Evaluate, CountingOracle) {
    Rng rng(2);
    const auto truths = random_labels(rng, 100);
    const auto preds = random_labels(rng, 100);
    const auto r = evaluate(preds, truths);
    std::uint64_t correct = 0;
    for (std::size_t a = 0; a < kNumClasses; ++a) {
        std::uint64_t row = 0;
        for (std::size_t b = 0; b < kNumClasses; ++b) {
            std::uint64_t count = 0;
            for (std::size_t i = 0; i < 100; ++i) {
                if (index_of(truths[i]) == a && index_of(preds[i]) == b) ++count;
            }
            EXPECT_EQ(r.confusion[a][b], count);
            row += count;
        }
        correct += r.confusion[a][a];
        EXPECT_EQ(r.per_class_recall[a], row ? static_cast<double>(r.confusion[a][a]) / row : 0.0);
    }
    EXPECT_EQ(r.accuracy, static_cast<double>(correct) / 100.0);
}

TEST(Evaluate, Errors) {
    EXPECT_THROW(evaluate(std::vector<Emotion>{Emotion::Sad}, std::vector<Emotion>{}), error);
    EXPECT_THROW(evaluate(std::vector<Emotion>{}, std::vector<Emotion>{}), error);
}

TEST(Evaluate, Properties) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(60);
        auto truths = random_labels(rng, n);
        auto preds = random_labels(rng, n);
        const auto r = evaluate(preds, truths);
        EXPECT_GE(r.accuracy, 0.0);
        EXPECT_LE(r.accuracy, 1.0);
        double weighted = 0;
        for (std::size_t c = 0; c < kNumClasses; ++c) weighted += r.per_class_recall[c] * r.row_sum(c);
        EXPECT_NEAR(weighted, static_cast<double>(r.correct()), 1e-9);

        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<Emotion> p2, t2;
        for (auto i : order) {
            p2.push_back(preds[i]);
            t2.push_back(truths[i]);
        }
        const auto r2 = evaluate(p2, t2);
        EXPECT_EQ(r2.confusion, r.confusion);
        EXPECT_EQ(r2.accuracy, r.accuracy);
    }
}

TEST(FormatPercent, RoundsHalfEven) {
    EXPECT_EQ(format_percent(392, 653), "60.03");
    EXPECT_EQ(format_percent(1, 1), "100.00");
    EXPECT_EQ(format_percent(0, 5), "0.00");
    EXPECT_EQ(format_percent(1, 7), "14.29");
    EXPECT_EQ(format_percent(1, 40000), "0.00");  // 0.0025%
    EXPECT_EQ(format_percent(3, 40000), "0.01");  // 0.0075%
    EXPECT_EQ(format_percent(1, 20000), "0.00");  // exactly 0.005%: tie, to even
    EXPECT_EQ(format_percent(3, 20000), "0.02");  // exactly 0.015%: tie, to even
    EXPECT_EQ(format_percent(5, 20000), "0.02");  // exactly 0.025%: tie, to even
}

TEST(RenderReport, Layout) {
    std::vector<Emotion> truths;
    for (std::size_t c = 0; c < kNumClasses; ++c) truths.push_back(emotion_at(c));
    const auto text = render_report(evaluate(truths, truths));
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "true\\pred    An    Di    Fe    Ha    Ne    Sa    Su   recall");
    EXPECT_NE(text.find("       An     1     0     0     0     0     0     0   100.00"), std::string::npos) << text;
    EXPECT_NE(text.find("accuracy = 100.00"), std::string::npos);
    EXPECT_NE(text.find("n = 7"), std::string::npos);
    EXPECT_EQ(text, render_report(evaluate(truths, truths)));
}

TEST(RenderReport, TwoDecimalAccuracy) {
    // 392 of 653 correct.
    std::vector<Emotion> truths(653, Emotion::Neutral);
    std::vector<Emotion> preds(653, Emotion::Sad);
    for (std::size_t i = 0; i < 392; ++i) preds[i] = Emotion::Neutral;
    const auto r = evaluate(preds, truths);
    EXPECT_NEAR(r.accuracy, 0.6003062787, 1e-10);
    EXPECT_NE(render_report(r).find("accuracy = 60.03\n"), std::string::npos);
}

TEST(ReportJson, Fields) {
    const std::vector<Emotion> t{Emotion::Fear, Emotion::Fear, Emotion::Sad};
    const std::vector<Emotion> p{Emotion::Fear, Emotion::Sad, Emotion::Sad};
    const auto j = nlohmann::json::parse(report_json(evaluate(p, t)));
    EXPECT_EQ(j.at("n"), 3);
    EXPECT_DOUBLE_EQ(j.at("accuracy").get<double>(), 2.0 / 3.0);
    EXPECT_EQ(j.at("confusion")[2][5], 1);
    EXPECT_DOUBLE_EQ(j.at("per_class_recall")[2].get<double>(), 0.5);
}
