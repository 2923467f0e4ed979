// Durand-Kerner root finder for small monic complex polynomials.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace henon {

// Roots of z^n + a_{n-1} z^{n-1} + ... + a_0, coefficients low-to-high
// without the leading 1. Plain simultaneous iteration; fine for the small
// degrees used here (branch inversion, elimination oracles).
inline std::vector<std::complex<double>> poly_roots_monic(
    const std::vector<std::complex<double>>& coeffs, int max_iter = 300, double tol = 1e-13) {
    using cd = std::complex<double>;
    const int n = static_cast<int>(coeffs.size());
    if (n == 0) return {};
    if (n == 1) return {-coeffs[0]};
    if (n == 2) {
        cd b = coeffs[1], c = coeffs[0];
        cd disc = std::sqrt(b * b - 4.0 * c);
        cd r1 = (-b + disc) * 0.5;
        cd r2 = (-b - disc) * 0.5;
        // stabilize the smaller root via the product
        if (std::abs(r1) > std::abs(r2)) r2 = (r1 != cd(0) ? c / r1 : r2);
        else if (std::abs(r2) > 0) r1 = c / r2;
        return {r1, r2};
    }
    auto eval = [&](cd z) {
        cd acc(1.0, 0.0);
        for (int k = n - 1; k >= 0; --k) acc = acc * z + coeffs[static_cast<size_t>(k)];
        return acc;
    };
    double radius = 0.0;
    for (const auto& c : coeffs) radius = std::max(radius, std::abs(c));
    radius = 1.0 + radius; // Cauchy bound
    std::vector<cd> r(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        double ang = 2.0 * std::numbers::pi * k / n + 0.4; // avoid axes
        r[static_cast<size_t>(k)] = 0.7 * radius * cd(std::cos(ang), std::sin(ang));
    }
    for (int it = 0; it < max_iter; ++it) {
        double move = 0.0;
        for (int k = 0; k < n; ++k) {
            cd denom(1.0, 0.0);
            for (int j = 0; j < n; ++j)
                if (j != k) denom *= r[static_cast<size_t>(k)] - r[static_cast<size_t>(j)];
            if (denom == cd(0)) denom = cd(1e-300, 0);
            cd delta = eval(r[static_cast<size_t>(k)]) / denom;
            r[static_cast<size_t>(k)] -= delta;
            move = std::max(move, std::abs(delta));
        }
        if (move < tol) break;
    }
    return r;
}

} // namespace henon
