// Test-only oracles, independent of the implementation paths they check:
// closed-form fixed points and multipliers, raw-limit Green values,
// resultant/companion-matrix elimination for low periods, and synthetic
// point-set fixtures for the geometry estimators.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <random>
#include <vector>

#include "henon/core.hpp"

namespace oracles {

using henon::C2;
using henon::cplx;
using henon::HenonFactor;
using henon::HenonMap;

inline HenonMap single(double a_re, double a_im, double c_re, double c_im) {
    return HenonMap({HenonFactor(cplx(a_re, a_im), {cplx(c_re, c_im)})});
}

inline HenonMap quad_map() { return single(0.5, 0, 0, 0); }       // two fixed points in closed form
inline HenonMap horseshoe() { return single(0.1, 0, -6, 0); }     // full binary horseshoe
inline HenonMap solenoid() { return single(0.05, 0, 0.05, 0); }   // connected-J regime

// Fixed points of a single-factor degree-2 map: roots of z^2 + (a-1)z + c, w = z.
inline std::vector<C2> fixed_points_closed_form(const cplx& a, const cplx& c) {
    cplx b = a - cplx(1, 0);
    cplx disc = std::sqrt(b * b - 4.0 * c);
    cplx z1 = 0.5 * (-b + disc), z2 = 0.5 * (-b - disc);
    return {{z1, z1}, {z2, z2}};
}

// Multipliers at a fixed point (z, z): eigenvalues of [[2z, a], [1, 0]],
// lambda = z +- sqrt(z^2 + a).
inline std::pair<cplx, cplx> fixed_point_multipliers(const cplx& a, const cplx& z) {
    cplx r = std::sqrt(z * z + a);
    cplx l1 = z + r, l2 = z - r;
    if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
    return {l1, l2}; // (lambda_u, lambda_s)
}

// Raw limit d^{-n} log^+ ||f^n(x)||, the defining formula for G+.
inline double green_raw_limit(const HenonMap& map, C2 x, int n_iter = 60) {
    double weight = 1.0;
    const double d = static_cast<double>(map.degree());
    double best = std::log(std::max(1.0, henon::norm_c2(x)));
    for (int k = 0; k < n_iter; ++k) {
        try {
            x = henon::evaluate(map, x);
        } catch (const henon::OverflowError&) {
            return best;
        }
        weight /= d;
        best = weight * std::log(std::max(1.0, henon::norm_c2(x)));
    }
    return best;
}

// Central finite differences of evaluate, step h.
inline henon::Mat2 derivative_fd(const HenonMap& map, const C2& x, double h = 1e-6) {
    auto col = [&](cplx dz, cplx dw) {
        C2 p = henon::evaluate(map, {x.z + dz, x.w + dw});
        C2 m = henon::evaluate(map, {x.z - dz, x.w - dw});
        return C2{(p.z - m.z) / (2.0 * h), (p.w - m.w) / (2.0 * h)};
    };
    C2 c0 = col(cplx(h, 0), cplx(0, 0));
    C2 c1 = col(cplx(0, 0), cplx(h, 0));
    return {c0.z, c1.z, c0.w, c1.w};
}

// --- elimination oracle for single-factor degree-2 maps, n <= 3 ---
//
// Periodic z-values satisfy the cyclic recurrence z_{k+1} = p(z_k) + a z_{k-1}.
// For n = 1, 2 direct elimination gives one polynomial; for n = 3 a numeric
// Sylvester resultant sampled and interpolated. Roots come from the
// companion matrix via Eigen's eigensolver: no Newton anywhere.

using Poly = std::vector<cplx>; // coefficients, low to high

inline Poly poly_mul(const Poly& f, const Poly& g) {
    Poly h(f.size() + g.size() - 1, cplx(0, 0));
    for (size_t i = 0; i < f.size(); ++i)
        for (size_t j = 0; j < g.size(); ++j) h[i + j] += f[i] * g[j];
    return h;
}

inline Poly poly_add(Poly f, const Poly& g) {
    if (g.size() > f.size()) f.resize(g.size(), cplx(0, 0));
    for (size_t i = 0; i < g.size(); ++i) f[i] += g[i];
    return f;
}

inline Poly poly_scale(Poly f, cplx s) {
    for (auto& v : f) v *= s;
    return f;
}

inline std::vector<cplx> companion_roots(Poly f) {
    while (f.size() > 1 && std::abs(f.back()) < 1e-14) f.pop_back();
    const int n = static_cast<int>(f.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) C(i, n - 1) = -f[static_cast<size_t>(i)] / f.back();
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
    std::vector<cplx> roots;
    for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
    return roots;
}

// z-values of all fixed points of f^n (n = 1, 2, 3), single factor z^2 + c.
inline std::vector<cplx> periodic_z_values(const cplx& a, const cplx& c, int n) {
    auto p_of = [&](const Poly& f) { // p(f) = f^2 + c
        Poly g = poly_mul(f, f);
        g[0] += c;
        return g;
    };
    Poly z{{cplx(0, 0), cplx(1, 0)}};
    if (n == 1) {
        // z^2 + (a-1)z + c = 0
        Poly f = p_of(z);
        f = poly_add(f, poly_scale(z, a - cplx(1, 0)));
        return companion_roots(f);
    }
    if (n == 2) {
        // z0 (1-a)^3 = p(z0)^2 (1-a) ... direct: (1-a) u z0 = p(p(z0)/u) u^2 with u = 1-a
        cplx u = cplx(1, 0) - a;
        Poly pz = p_of(z);                       // p(z0)
        Poly inner = poly_mul(pz, pz);           // p(z0)^2
        Poly f = poly_add(inner, Poly{c * u * u}); // p(z0)^2 + c u^2
        f = poly_add(f, poly_scale(z, -u * u * u)); // - z0 u^3
        return companion_roots(f);
    }
    if (n == 3) {
        // A(z0,z1) = z1 - p(z0) - a p(z1) - a^2 z0
        // B(z0,z1) = z0 - p(p(z1) + a z0) - a z1
        // Res_{z1}(A, B) sampled at 17 nodes and interpolated (degree 8).
        const int deg = 8, samples = deg + 9;
        std::vector<cplx> nodes, values;
        for (int s = 0; s < samples; ++s) {
            cplx z0 = 3.5 * std::polar(1.0, 2.0 * std::numbers::pi * s / samples + 0.3);
            // A as a polynomial in z1 (degree 2), B (degree 4)
            Poly A{-(z0 * z0 + c) - a * c - a * a * z0, cplx(1, 0), -a};
            // q(z1) = p(z1) + a z0 ; B = z0 - (q^2 + c) - a z1
            Poly q{c + a * z0, cplx(0, 0), cplx(1, 0)};
            Poly B = poly_mul(q, q);
            B = poly_scale(B, cplx(-1, 0));
            B = poly_add(B, Poly{z0 - c, -a});
            // Sylvester matrix (2+4)x(2+4)
            Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(6, 6);
            for (int r = 0; r < 4; ++r)
                for (int k = 0; k <= 2; ++k) S(r, r + k) = A[static_cast<size_t>(2 - k)];
            for (int r = 0; r < 2; ++r)
                for (int k = 0; k <= 4; ++k) S(4 + r, r + k) = B[static_cast<size_t>(4 - k)];
            nodes.push_back(z0);
            values.push_back(S.determinant());
        }
        // interpolate the degree-<=samples-1 polynomial, keep through deg
        Eigen::MatrixXcd V(samples, samples);
        Eigen::VectorXcd rhs(samples);
        for (int i = 0; i < samples; ++i) {
            cplx pw(1, 0);
            for (int j = 0; j < samples; ++j) {
                V(i, j) = pw;
                pw *= nodes[static_cast<size_t>(i)];
            }
            rhs(i) = values[static_cast<size_t>(i)];
        }
        Eigen::VectorXcd coef = V.partialPivLu().solve(rhs);
        Poly R;
        for (int j = 0; j <= deg; ++j) R.push_back(coef(j));
        return companion_roots(R);
    }
    throw std::invalid_argument("periodic_z_values: n must be 1..3");
}

// --- synthetic point sets for the geometry estimators ---

inline std::vector<cplx> line_points(int n, double angle, uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> t(-1.0, 1.0);
    std::vector<cplx> out;
    for (int i = 0; i < n; ++i) out.push_back(std::polar(t(rng), angle));
    return out;
}

inline std::vector<cplx> disk_points(int n, uint64_t seed = 11) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<cplx> out;
    for (int i = 0; i < n; ++i)
        out.push_back(std::polar(std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng)));
    return out;
}

// middle-thirds Cantor set on [0,1] embedded on the real axis
inline std::vector<cplx> cantor_points(int level) {
    std::vector<double> xs{0.0};
    double len = 1.0;
    for (int l = 0; l < level; ++l) {
        len /= 3.0;
        std::vector<double> next;
        next.reserve(xs.size() * 2);
        for (double x : xs) {
            next.push_back(x);
            next.push_back(x + 2.0 * len);
        }
        xs = std::move(next);
    }
    std::vector<cplx> out;
    out.reserve(xs.size() * 2);
    double len2 = len / 2.0;
    for (double x : xs) {
        out.push_back(cplx(x + 0.25 * len2, 0.0));
        out.push_back(cplx(x + 0.75 * len2, 0.0));
    }
    return out;
}

inline std::mt19937_64 seeded_rng(uint64_t s) { return std::mt19937_64(s); }

} // namespace oracles
