#pragma once

// Reference computations used only to check the library: a textbook DFT
// and a primal projected-subgradient SVM solver. Neither shares code with
// the production paths they verify.

#include "emovid/core.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace emovid::oracle {

/// S[k] = sum_t s_t exp(-2 pi i k t / T), evaluated term by term.
inline std::vector<std::complex<double>> dft(std::span<const double> s) {
    const std::size_t n = s.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < n; ++t) {
            const double angle =
                -2.0 * std::numbers::pi * static_cast<double>(k) * static_cast<double>(t) / static_cast<double>(n);
            acc += s[t] * std::polar(1.0, angle);
        }
        out[k] = acc;
    }
    return out;
}

/// Mean DFT magnitude of one column.
inline double fft_mean(std::span<const double> s) {
    double acc = 0.0;
    for (const auto& v : dft(s)) acc += std::abs(v);
    return acc / static_cast<double>(s.size());
}

/// Full-batch projected subgradient descent on
///   lambda/2 ||w||^2 + 1/N sum_i hinge_i,   lambda = 1 / (C N),
/// which has the same minimizer as the C-weighted primal. Step 1/(lambda t),
/// projection onto the ball of radius 1/sqrt(lambda) that contains the
/// optimum. Returns the average of the second half of the iterates.
inline std::vector<double> svm_subgradient(const Matrix& X, std::span<const int> y, double C,
                                           std::size_t iterations, std::uint64_t /*seed*/, bool bias = true) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols() + (bias ? 1 : 0);
    const double lambda = 1.0 / (C * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);
    std::vector<double> w(d, 0.0);
    std::vector<double> avg(d, 0.0);
    std::vector<double> g(d);
    std::size_t averaged = 0;
    for (std::size_t t = 1; t <= iterations; ++t) {
        for (std::size_t j = 0; j < d; ++j) g[j] = lambda * w[j];
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = X.row(i);
            double margin = bias ? w[d - 1] : 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) margin += w[j] * x[j];
            if (y[i] * margin < 1.0) {
                const double coef = static_cast<double>(y[i]) / static_cast<double>(n);
                for (std::size_t j = 0; j < x.size(); ++j) g[j] -= coef * x[j];
                if (bias) g[d - 1] -= coef;
            }
        }
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        double norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            w[j] -= eta * g[j];
            norm2 += w[j] * w[j];
        }
        if (norm2 > radius * radius) {
            const double shrink = radius / std::sqrt(norm2);
            for (auto& v : w) v *= shrink;
        }
        if (t > iterations / 2) {
            ++averaged;
            for (std::size_t j = 0; j < d; ++j) avg[j] += (w[j] - avg[j]) / static_cast<double>(averaged);
        }
    }
    return avg;
}

}  // namespace emovid::oracle
