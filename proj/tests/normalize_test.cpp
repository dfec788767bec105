#include "emovid/normalize.hpp"
#include "emovid/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace emovid;

namespace {

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) m(i, j) = scale * rng.normal() + static_cast<double>(j);
    }
    return m;
}

double l2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST(RangeScaler, Fit) {
    const auto single = Matrix::from_rows({{1, -2, 3}});
    const auto p = fit_range_scaler(single);
    EXPECT_EQ(p.mins, (std::vector<double>{1, -2, 3}));
    EXPECT_EQ(p.maxs, p.mins);

    const auto col = Matrix::from_rows({{-2}, {0}, {2}});
    EXPECT_EQ(fit_range_scaler(col).mins[0], -2);
    EXPECT_EQ(fit_range_scaler(col).maxs[0], 2);

    EXPECT_THROW(fit_range_scaler(Matrix{}), error);
}

TEST(RangeScaler, LinearScanOracle) {
    Rng rng(1);
    const auto m = random_matrix(rng, 50, 8);
    const auto p = fit_range_scaler(m);
    for (std::size_t j = 0; j < 8; ++j) {
        double lo = m(0, j), hi = m(0, j);
        for (std::size_t i = 0; i < 50; ++i) {
            lo = m(i, j) < lo ? m(i, j) : lo;
            hi = m(i, j) > hi ? m(i, j) : hi;
        }
        EXPECT_EQ(p.mins[j], lo);
        EXPECT_EQ(p.maxs[j], hi);
    }
}

TEST(RangeScaler, Apply) {
    const RangeScalerParams p{{-2, 5}, {2, 5}};
    EXPECT_EQ(apply_range_scaler(std::vector<double>{1, 5}, p), (std::vector<double>{0.5, 0}));
    EXPECT_EQ(apply_range_scaler(std::vector<double>{3, 7}, p), (std::vector<double>{1.0, 0}));
    EXPECT_EQ(apply_range_scaler(std::vector<double>{-9, 5}, p)[0], -1.0);
    EXPECT_THROW(apply_range_scaler(std::vector<double>{1}, p), error);
}

TEST(RangeScaler, TrainEndpointsAttained) {
    Rng rng(2);
    const auto m = random_matrix(rng, 30, 6, 4.0);
    const auto p = fit_range_scaler(m);
    for (std::size_t j = 0; j < 6; ++j) {
        double lo = 2, hi = -2;
        for (std::size_t i = 0; i < 30; ++i) {
            const double y = apply_range_scaler(m.row(i), p)[j];
            EXPECT_GE(y, -1.0);
            EXPECT_LE(y, 1.0);
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        EXPECT_EQ(lo, -1.0);
        EXPECT_EQ(hi, 1.0);
    }
}

TEST(Rootsift, Examples) {
    EXPECT_EQ(rootsift(std::vector<double>{1}), std::vector<double>{1.0});
    const auto y = rootsift(std::vector<double>(9, 2.5));
    for (double v : y) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
    const auto z = rootsift(std::vector<double>{4, -1});
    EXPECT_NEAR(z[0], 0.8944271909999159, 1e-15);
    EXPECT_NEAR(z[1], -0.4472135954999579, 1e-15);
    EXPECT_NEAR(l2(z), 1.0, 1e-15);
    EXPECT_EQ(rootsift(std::vector<double>{0, 0, 0}), (std::vector<double>{0, 0, 0}));
}

TEST(Rootsift, UnitNormSignsAndArgmax) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(1 + rng.uniform_index(300));
        for (auto& v : x) v = rng.normal() * 10;
        const auto y = rootsift(x);
        EXPECT_NEAR(l2(y), 1.0, 1e-9);
        std::size_t ax = 0, ay = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            EXPECT_EQ(std::signbit(x[j]), std::signbit(y[j]));
            if (std::abs(x[j]) > std::abs(x[ax])) ax = j;
            if (std::abs(y[j]) > std::abs(y[ay])) ay = j;
        }
        EXPECT_EQ(ax, ay);
    }
}

TEST(Standardizer, Fit) {
    const auto p = fit_standardizer(Matrix::from_rows({{0, 3}, {2, 3}}));
    EXPECT_EQ(p.means, (std::vector<double>{1, 3}));
    EXPECT_EQ(p.stds, (std::vector<double>{1, 0}));
    EXPECT_THROW(fit_standardizer(Matrix{}), error);
}

TEST(Standardizer, TwoPassOracle) {
    Rng rng(4);
    const auto m = random_matrix(rng, 100, 5, 3.0);
    const auto p = fit_standardizer(m);
    for (std::size_t j = 0; j < 5; ++j) {
        double sum = 0;
        for (std::size_t i = 0; i < 100; ++i) sum += m(i, j);
        const double mean = sum / 100;
        double ss = 0;
        for (std::size_t i = 0; i < 100; ++i) ss += (m(i, j) - mean) * (m(i, j) - mean);
        EXPECT_NEAR(p.means[j], mean, 1e-12);
        EXPECT_NEAR(p.stds[j], std::sqrt(ss / 100), 1e-12);
    }
}

TEST(Standardizer, Apply) {
    const StandardizerParams p{{1, 4}, {2, 0}};
    EXPECT_EQ(apply_standardizer(std::vector<double>{5, 9}, p), (std::vector<double>{2, 0}));
    EXPECT_THROW(apply_standardizer(std::vector<double>{5}, p), error);
}

TEST(Standardizer, FittedTrainHasZeroMeanUnitStd) {
    Rng rng(5);
    const auto m = random_matrix(rng, 40, 7, 5.0);
    const auto p = fit_standardizer(m);
    Matrix out(40, 7);
    for (std::size_t i = 0; i < 40; ++i) {
        const auto y = apply_standardizer(m.row(i), p);
        std::copy(y.begin(), y.end(), out.row(i).begin());
    }
    const auto q = fit_standardizer(out);
    for (std::size_t j = 0; j < 7; ++j) {
        EXPECT_NEAR(q.means[j], 0.0, 1e-9);
        EXPECT_NEAR(q.stds[j], 1.0, 1e-9);
    }
}

TEST(Pipeline, SameSetsGiveSameOutputs) {
    Rng rng(6);
    const auto m = random_matrix(rng, 12, 4);
    const auto r = normalize_pipeline(m, m);
    EXPECT_EQ(r.train, r.others);
}

TEST(Pipeline, RootsiftStageHasUnitNorm) {
    Rng rng(7);
    const auto train = random_matrix(rng, 20, 6);
    const auto test = random_matrix(rng, 10, 6, 3.0);
    const auto params = fit_normalization(train, {true, true, false});
    for (std::size_t i = 0; i < test.rows(); ++i) {
        const auto scaled = apply_range_scaler(test.row(i), *params.range);
        const auto y = params.apply(test.row(i));
        if (l2(scaled) > 0) {
            EXPECT_NEAR(l2(y), 1.0, 1e-9);
        }
    }
}

TEST(Pipeline, SingleTrainingVideoCollapsesToZero) {
    const auto train = Matrix::from_rows({{1, 2, 3}});
    const auto others = Matrix::from_rows({{4, 5, 6}, {-1, 0, 1}});
    const auto r = normalize_pipeline(train, others);
    for (double v : r.train.data()) EXPECT_EQ(v, 0.0);
    for (double v : r.others.data()) EXPECT_EQ(v, 0.0);
}

TEST(Pipeline, Deterministic) {
    Rng rng(8);
    const auto train = random_matrix(rng, 25, 9);
    const auto test = random_matrix(rng, 5, 9);
    const auto a = normalize_pipeline(train, test);
    const auto b = normalize_pipeline(train, test);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.others, b.others);
    EXPECT_EQ(a.params, b.params);
}

TEST(Pipeline, TogglesSkipStages) {
    Rng rng(9);
    const auto train = random_matrix(rng, 10, 3);
    const auto p = fit_normalization(train, {false, false, false});
    EXPECT_EQ(p.apply(train), train);
    EXPECT_THROW(normalize_pipeline(train, Matrix::from_rows({{1, 2}})), error);
}
