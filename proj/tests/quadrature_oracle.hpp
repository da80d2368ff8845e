#pragma once

// Test-only phase-space quadrature oracle: evaluates 2*pi Int W_a W_b dx dp
// on a trapezoid grid wide enough that truncation is negligible. Independent
// of the closed-form purity/overlap implementations.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qclass/gaussian.hpp"

namespace qclass::testing {

// Normalized Wigner density value for a zero-mean shape.
inline double wigner_value(const GaussianShape& s, double x, double p) {
    const double norm = std::sqrt(s.det()) / std::numbers::pi;
    return norm * std::exp(-s.alpha * x * x - s.beta * p * p - 2.0 * s.gamma * x * p);
}

// 2*pi Int W_a W_b over a square grid covering +-8 sigma of the wider state.
inline double wigner_product_quadrature(const GaussianShape& a, const GaussianShape& b,
                                        int n_points = 501) {
    auto max_sigma = [](const GaussianShape& s) {
        // Largest eigenvalue of the covariance matrix Sigma = M^{-1}/2.
        const double det = s.det();
        const double tr = (s.alpha + s.beta) / (2.0 * det);
        const double dd = (s.alpha - s.beta) / (2.0 * det);
        const double disc = std::sqrt(dd * dd + 4.0 * s.gamma * s.gamma / (4.0 * det * det));
        return std::sqrt(0.5 * (tr + disc));
    };
    const double extent = 8.0 * std::max(max_sigma(a), max_sigma(b));
    const double h = 2.0 * extent / (n_points - 1);
    double sum = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double x = -extent + i * h;
        const double wx = (i == 0 || i == n_points - 1) ? 0.5 : 1.0;
        for (int j = 0; j < n_points; ++j) {
            const double p = -extent + j * h;
            const double wp = (j == 0 || j == n_points - 1) ? 0.5 : 1.0;
            sum += wx * wp * wigner_value(a, x, p) * wigner_value(b, x, p);
        }
    }
    return 2.0 * std::numbers::pi * sum * h * h;
}

inline double purity_quadrature(const GaussianShape& s, int n_points = 501) {
    return wigner_product_quadrature(s, s, n_points);
}

} // namespace qclass::testing
