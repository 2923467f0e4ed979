// Local stable/unstable manifolds as truncated power series semiconjugating
// f^n to zeta |-> lambda*zeta, global extension by the dynamics, unstable
// Julia slices, homoclinic intersection search, and slice-geometry
// diagnostics (origin line fit, box-counting dimension).
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <unordered_set>
#include <vector>

#include "henon/core.hpp"
#include "henon/periodic.hpp"
#include "henon/potential.hpp"

namespace henon {

struct ResonanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace series {

using Series = std::vector<cplx>; // coefficients 0..M

inline Series mul(const Series& a, const Series& b) {
    const size_t M = a.size() - 1;
    Series c(M + 1, cplx(0, 0));
    for (size_t i = 0; i <= M; ++i) {
        if (a[i] == cplx(0, 0)) continue;
        for (size_t j = 0; i + j <= M; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

inline Series add(Series a, const Series& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Series scale(Series a, cplx s) {
    for (auto& v : a) v *= s;
    return a;
}

inline cplx eval(const Series& a, cplx zeta) {
    cplx acc(0, 0);
    for (size_t k = a.size(); k-- > 0;) acc = acc * zeta + a[k];
    return acc;
}

inline Series derivative(const Series& a) {
    Series d(a.size(), cplx(0, 0));
    for (size_t k = 1; k < a.size(); ++k) d[k - 1] = double(k) * a[k];
    return d;
}

// p applied to a series argument, truncated; p monic without z^{d-1} term.
inline Series poly_of(const HenonFactor& f, const Series& Z) {
    const size_t M = Z.size() - 1;
    Series acc = Z;
    const int d = f.degree();
    for (int k = d - 2; k >= 0; --k) {
        acc = mul(acc, Z);
        acc[0] += f.coeffs()[static_cast<size_t>(k)];
    }
    (void)M;
    return acc;
}

struct Series2 {
    Series z, w;
};

inline Series2 apply_map(const HenonMap& map, Series2 s) {
    for (const auto& f : map.factors()) {
        Series nz = add(poly_of(f, s.z), scale(s.w, f.a()));
        s.w = s.z;
        s.z = std::move(nz);
    }
    return s;
}

inline Series2 apply_map_n(const HenonMap& map, Series2 s, int n) {
    for (int i = 0; i < n; ++i) s = apply_map(map, s);
    return s;
}

// Composition S(T(x)) truncated (T[0] must be 0).
inline Series compose(const Series& S, const Series& T) {
    const size_t M = S.size() - 1;
    Series horner(M + 1, cplx(0, 0));
    horner[0] = S[M];
    for (size_t j = M; j-- > 0;) {
        horner = mul(horner, T);
        horner[0] += S[j];
    }
    return horner;
}

// Reversion of S with S[0] = 0, S[1] != 0: returns T with S(T(x)) = x + O(x^{M+1}).
inline Series revert(const Series& S) {
    const size_t M = S.size() - 1;
    Series T(M + 1, cplx(0, 0));
    T[1] = cplx(1, 0) / S[1];
    for (size_t k = 2; k <= M; ++k) {
        Series c = compose(S, T); // order-k defect with T_k still zero
        T[k] = -c[k] / S[1];
    }
    return T;
}

} // namespace series

// Truncated parametrization psi: C -> C^2 with f^n(psi(zeta)) = psi(lambda zeta).
struct LocalManifold {
    C2 base_point{};
    int period = 1;
    bool unstable = true;
    cplx lambda{};
    std::vector<C2> coeffs;      // psi_0..psi_M
    double validity_radius = 0.0;
    double series_tol = 0.0;

    C2 eval(cplx zeta) const {
        cplx z(0, 0), w(0, 0);
        for (size_t k = coeffs.size(); k-- > 0;) {
            z = z * zeta + coeffs[k].z;
            w = w * zeta + coeffs[k].w;
        }
        return {z, w};
    }

    C2 eval_deriv(cplx zeta) const {
        cplx z(0, 0), w(0, 0);
        for (size_t k = coeffs.size(); k-- > 1;) {
            z = z * zeta + double(k) * coeffs[k].z;
            w = w * zeta + double(k) * coeffs[k].w;
        }
        return {z, w};
    }
};

enum class ManifoldKind { stable, unstable };

// Coefficient recursion (Monodromy - lambda^k I) psi_k = -[f^n o psi_{<k}]_k.
inline LocalManifold local_series(const HenonMap& map, const PeriodicOrbit& saddle,
                                  ManifoldKind kind, int order = 25, double series_tol = 1e-10) {
    if (order < 2) throw std::invalid_argument("local_series: order must be >= 2");
    const int n = saddle.period;
    const Mat2& Mo = saddle.monodromy;
    const cplx lu = saddle.lambda_u, ls = saddle.lambda_s;
    const cplx lambda = (kind == ManifoldKind::unstable) ? lu : ls;
    const cplx other = (kind == ManifoldKind::unstable) ? ls : lu;
    LocalManifold man;
    man.base_point = saddle.points.front();
    man.period = n;
    man.unstable = (kind == ManifoldKind::unstable);
    man.lambda = lambda;
    man.series_tol = series_tol;
    man.coeffs.assign(static_cast<size_t>(order) + 1, C2{});
    man.coeffs[0] = man.base_point;
    man.coeffs[1] = detail::eigenvector_of(Mo, lambda);
    cplx lk = lambda;
    for (int k = 2; k <= order; ++k) {
        lk *= lambda;
        if (std::min(std::abs(lk - lambda), std::abs(lk - other)) < 1e-8)
            throw ResonanceError("local_series: near-resonance lambda^" + std::to_string(k));
        series::Series2 psi;
        psi.z.assign(static_cast<size_t>(order) + 1, cplx(0, 0));
        psi.w.assign(static_cast<size_t>(order) + 1, cplx(0, 0));
        for (int j = 0; j < k; ++j) {
            psi.z[static_cast<size_t>(j)] = man.coeffs[static_cast<size_t>(j)].z;
            psi.w[static_cast<size_t>(j)] = man.coeffs[static_cast<size_t>(j)].w;
        }
        series::Series2 img = series::apply_map_n(map, psi, n);
        C2 g{img.z[static_cast<size_t>(k)], img.w[static_cast<size_t>(k)]};
        // solve (Mo - lk I) v = -g
        Mat2 A{Mo.m00 - lk, Mo.m01, Mo.m10, Mo.m11 - lk};
        cplx det = A.det();
        C2 v{(-g.z * A.m11 + g.w * A.m01) / det, (g.z * A.m10 - g.w * A.m00) / det};
        man.coeffs[static_cast<size_t>(k)] = v;
    }
    // largest dyadic radius passing the defect test on sampled circles
    auto defect_at = [&](double r) {
        double worst = 0.0;
        for (int s = 0; s < 16; ++s) {
            double ang = 2.0 * std::numbers::pi * s / 16.0;
            cplx zeta = r * cplx(std::cos(ang), std::sin(ang));
            C2 x = man.eval(zeta);
            try {
                for (int i = 0; i < n; ++i) x = evaluate(map, x);
            } catch (const OverflowError&) {
                return std::numeric_limits<double>::infinity();
            }
            worst = std::max(worst, dist(x, man.eval(lambda * zeta)));
        }
        return worst;
    };
    man.validity_radius = 0.0;
    for (int j = 4; j >= -40; --j) {
        double r = std::ldexp(1.0, j);
        if (defect_at(r) < series_tol) {
            man.validity_radius = r;
            break;
        }
    }
    if (man.validity_radius == 0.0)
        throw std::runtime_error("local_series: no dyadic radius passed the defect test");
    return man;
}

// psi(zeta) for arbitrary zeta via the semiconjugacy: pull the argument
// into the validity disk, evaluate, then push forward (unstable) or
// backward (stable) by the dynamics.
inline C2 extend(const HenonMap& map, const LocalManifold& man, cplx zeta,
                 double ceiling = kDefaultCeiling) {
    int m = 0;
    cplx arg = zeta;
    const double r = man.validity_radius;
    // shrink the argument into the validity disk: divide by lambda on the
    // unstable side (|lambda| > 1), multiply on the stable side
    while (std::abs(arg) > r) {
        arg = man.unstable ? arg / man.lambda : arg * man.lambda;
        ++m;
        if (m > 4000) throw std::runtime_error("extend: argument reduction failed");
    }
    C2 x = man.eval(arg);
    for (int i = 0; i < m * man.period; ++i)
        x = man.unstable ? evaluate(map, x, ceiling) : evaluate_inverse(map, x, ceiling);
    return x;
}

// --- unstable slice with the max_{|zeta|<=1} G+ = 1 normalization ---

// G+ along the unstable parametrization without materializing far points:
// G+(psi(zeta)) = (d^n)^m G+(psi(lambda^{-m} zeta)).
inline GreenValue green_on_unstable(const GreenEvaluator& ev, const LocalManifold& man,
                                    cplx zeta) {
    int m = 0;
    cplx arg = zeta;
    while (std::abs(arg) > man.validity_radius) {
        arg /= man.lambda;
        ++m;
        if (m > 4000) throw std::runtime_error("green_on_unstable: argument reduction failed");
    }
    GreenValue g = ev.plus(man.eval(arg));
    const double dn = std::pow(static_cast<double>(ev.map().degree()), man.period);
    g.value *= std::pow(dn, m);
    return g;
}

inline double circle_max_green(const GreenEvaluator& ev, const HenonMap& map,
                               const LocalManifold& man, double r, int samples = 96) {
    (void)map;
    double mx = 0.0;
    for (int s = 0; s < samples; ++s) {
        double ang = 2.0 * std::numbers::pi * s / samples;
        mx = std::max(mx, green_on_unstable(ev, man, std::polar(r, ang)).value);
    }
    return mx;
}

// Scale s with max_{|zeta|<=s} G+(psi(zeta)) = 1; the normalized
// parametrization is zeta |-> psi(s*zeta).
inline double green_normalization_scale(const GreenEvaluator& ev, const HenonMap& map,
                                        const LocalManifold& man, double rel_tol = 1e-4) {
    double lo = 1.0, hi = 1.0;
    double g = circle_max_green(ev, map, man, 1.0);
    const double lam = std::abs(man.lambda);
    if (g < 1.0) {
        while (g < 1.0) {
            lo = hi;
            hi *= lam;
            g = circle_max_green(ev, map, man, hi);
            if (hi > 1e12) throw std::runtime_error("green_normalization_scale: no bracket");
        }
    } else {
        while (g >= 1.0) {
            hi = lo;
            lo /= lam;
            g = circle_max_green(ev, map, man, lo);
            if (lo < 1e-12) throw std::runtime_error("green_normalization_scale: no bracket");
        }
    }
    for (int it = 0; it < 60 && (hi - lo) > rel_tol * lo; ++it) {
        double mid = std::sqrt(lo * hi);
        (circle_max_green(ev, map, man, mid) >= 1.0 ? hi : lo) = mid;
    }
    return std::sqrt(lo * hi);
}

inline SliceSample unstable_slice(const HenonMap& map, const LocalManifold& man, double radius,
                                  int resolution, double tol, long cap = 2000, int threads = 1) {
    if (!man.unstable) throw std::invalid_argument("unstable_slice: needs an unstable manifold");
    GreenEvaluator::Options o;
    o.tol = tol;
    o.cap = cap;
    GreenEvaluator ev(map, o);
    SliceSample s = slice_from_green_fn(
        [&](cplx zeta) { return green_on_unstable(ev, man, zeta); }, radius, resolution, tol,
        threads);
    s.rescale = green_normalization_scale(ev, map, man);
    return s;
}

// --- saddle chart and homoclinic search ---

// Eigenframe coordinates at the saddle plus the local stable manifold as a
// graph u = Phi(s), so that g(x) = u(x) - Phi(s(x)) vanishes exactly on
// W^s_loc. Built from the stable series by power-series reversion.
struct SaddleChart {
    C2 p{};
    Mat2 frame{};   // columns e_u, e_s
    Mat2 inv{};     // frame^{-1}
    series::Series graph;      // Phi: u = Phi(s) on W^s_loc
    series::Series zeta_of_s;  // reversion: stable parameter as a series in s
    double s_radius = 0.0;     // chart validity in the s coordinate
    LocalManifold stable;

    // (u, s) coordinates of x
    C2 coords(const C2& x) const {
        C2 d{x.z - p.z, x.w - p.w};
        return mat_apply(inv, d);
    }

    cplx stable_residual(const C2& x) const {
        C2 us = coords(x);
        return us.z - series::eval(graph, us.w);
    }
};

inline SaddleChart build_chart(const PeriodicOrbit& saddle,
                               const LocalManifold& stable_man, double graph_tol = 1e-9) {
    SaddleChart ch;
    ch.p = saddle.points.front();
    C2 eu = detail::eigenvector_of(saddle.monodromy, saddle.lambda_u);
    C2 es = detail::eigenvector_of(saddle.monodromy, saddle.lambda_s);
    ch.frame = {eu.z, es.z, eu.w, es.w};
    cplx det = ch.frame.det();
    ch.inv = {ch.frame.m11 / det, -ch.frame.m01 / det, -ch.frame.m10 / det, ch.frame.m00 / det};
    ch.stable = stable_man;
    // stable series in frame coordinates
    const size_t M = stable_man.coeffs.size() - 1;
    series::Series U(M + 1, cplx(0, 0)), S(M + 1, cplx(0, 0));
    for (size_t k = 1; k <= M; ++k) {
        C2 c = stable_man.coeffs[k];
        C2 us = mat_apply(ch.inv, c);
        U[k] = us.z;
        S[k] = us.w;
    }
    series::Series T = series::revert(S);     // zeta as a series in s
    ch.zeta_of_s = T;
    ch.graph = series::compose(U, T);         // u = U(zeta(s))
    ch.graph[0] = cplx(0, 0);
    // certify the graph on the manifold itself: largest dyadic s-radius
    // where points of W^s_loc have residual below graph_tol
    const double s1 = std::abs(S[1]);
    double rmax = stable_man.validity_radius * s1;
    ch.s_radius = 0.0;
    for (int j = 0; j < 44; ++j) {
        double r = rmax * std::ldexp(1.0, -j);
        bool pass = true;
        for (int a = 0; a < 12 && pass; ++a) {
            cplx zeta = (r / s1) * std::polar(1.0, 2.0 * std::numbers::pi * a / 12.0);
            C2 x = stable_man.eval(zeta);
            if (std::abs(ch.stable_residual(x)) > graph_tol) pass = false;
        }
        if (pass) {
            ch.s_radius = r;
            break;
        }
    }
    if (ch.s_radius == 0.0)
        throw std::runtime_error("build_chart: stable graph failed certification");
    return ch;
}

struct HomoclinicPoint {
    cplx zeta{};          // unstable parameter; the point is psi^u(zeta)
    int landing_k = 0;    // forward iterates to enter the stable chart
    double transversality = 0.0; // |angle| between Df^k(psi_u') and the stable direction
    C2 point{};           // psi^u(zeta)
    double residual = 0.0; // |stable chart residual| after Newton
};

struct HomoclinicConfig {
    int angular_steps = 96;
    int radial_steps = 12;
    int max_land = 80;
    int scan_k_max = 14;    // iterate-count ladder for the coarse scan
    int verify_iters = 40;
    double transversality_floor = 1e-3;
    double tol = 1e-11;
    double chart_fraction = 0.6;  // entry shell cap, fraction of s_radius
    double entry_scale = 0.2;     // entry shell cap, fraction of the dynamical scale
    double exit_factor = 2.0;     // leave threshold relative to the entry shell
    double converge_dist = 1e-8;
};

struct HomoclinicSearchResult {
    std::vector<HomoclinicPoint> points;
    std::vector<HomoclinicPoint> tangencies; // below the transversality floor
};

namespace detail {

// First k <= max_land with f^k(x) back inside the chart shell after having
// left it; -1 if the orbit never makes the excursion and returns. The
// leave-then-return structure keeps points that merely start near the
// saddle from registering as homoclinic landings.
inline int landing_index(const HenonMap& map, const SaddleChart& ch, C2 x, int max_land,
                         double shell_in, double shell_out) {
    bool left = false;
    {
        C2 us0 = ch.coords(x);
        left = std::max(std::abs(us0.z), std::abs(us0.w)) > shell_out;
    }
    for (int k = 1; k <= max_land; ++k) {
        try {
            x = evaluate(map, x);
        } catch (const OverflowError&) {
            return -1;
        }
        C2 us = ch.coords(x);
        double nrm = std::max(std::abs(us.z), std::abs(us.w));
        if (!left && nrm > shell_out) left = true;
        if (left && nrm < shell_in) return k;
        if (std::max(std::abs(x.z), std::abs(x.w)) > 1e8) return -1;
    }
    return -1;
}

} // namespace detail

inline HomoclinicSearchResult find_homoclinic(const HenonMap& map, const PeriodicOrbit& saddle,
                                              const LocalManifold& unstable_man,
                                              const SaddleChart& chart, double r1, double r2,
                                              const HomoclinicConfig& cfg = {}) {
    if (r1 <= 0.0) throw std::invalid_argument("find_homoclinic: r1 must be positive");
    HomoclinicSearchResult out;
    const double shell_in = std::min(cfg.chart_fraction * chart.s_radius,
                                     cfg.entry_scale * filtration_radius(map));
    const double shell_out = cfg.exit_factor * shell_in;
    auto h_of = [&](cplx zeta, int k) -> std::optional<cplx> {
        C2 x;
        try {
            x = extend(map, unstable_man, zeta);
            for (int i = 0; i < k; ++i) x = evaluate(map, x);
        } catch (const OverflowError&) {
            return std::nullopt;
        }
        C2 us = chart.coords(x);
        if (std::abs(us.w) > chart.s_radius) return std::nullopt;
        return chart.stable_residual(x);
    };
    const cplx lam_u = unstable_man.lambda;
    auto canonical_zeta = [&](cplx zeta) {
        const double L = std::log(std::abs(lam_u));
        double m = std::floor((std::log(std::abs(zeta)) - std::log(r1)) / L);
        return zeta * std::pow(lam_u, -m);
    };
    auto already_found = [&](cplx zc) {
        for (const auto& hp : out.points)
            if (std::abs(hp.zeta - zc) < 1e-6 * std::abs(zc)) return true;
        for (const auto& hp : out.tangencies)
            if (std::abs(hp.zeta - zc) < 1e-6 * std::abs(zc)) return true;
        return false;
    };
    // Newton on h_k for a ladder of iterate counts k: zeros of h_k are
    // points whose k-th iterate sits on the stable graph (landings of index
    // <= k, the graph being forward invariant). Each zero is then verified
    // independently.
    auto newton_at = [&](cplx z, int k) -> std::optional<cplx> {
        for (int it = 0; it < 40; ++it) {
            auto h = h_of(z, k);
            if (!h) return std::nullopt;
            if (std::abs(*h) < cfg.tol) return z;
            double step = 1e-7 * std::max(1.0, std::abs(z));
            auto hp = h_of(z + step, k);
            auto hm = h_of(z - step, k);
            if (!hp || !hm) return std::nullopt;
            cplx deriv = (*hp - *hm) / (2.0 * step);
            if (std::abs(deriv) < 1e-300) return std::nullopt;
            cplx delta = *h / deriv;
            if (std::abs(delta) > 0.2 * std::abs(z)) delta *= 0.2 * std::abs(z) / std::abs(delta);
            z -= delta;
            if (std::abs(z) < 0.2 * r1 || std::abs(z) > 5.0 * r2) return std::nullopt;
        }
        return std::nullopt;
    };
    // verify one Newton zero: landing, convergence to the saddle orbit,
    // transversality; then file it under points or tangency candidates
    auto process_candidate = [&](cplx zstar) {
        cplx zc = canonical_zeta(zstar);
        if (already_found(zc)) return;
        C2 x = extend(map, unstable_man, zc);
        int kc = detail::landing_index(map, chart, x, cfg.max_land, shell_in, shell_out);
        if (kc < 0) return;
        // the forward orbit must approach the saddle orbit; the best
        // approach is read off before amplified rounding noise ejects the
        // numerical orbit again
        C2 cur = x;
        double best_approach = std::numeric_limits<double>::infinity();
        try {
            for (int i = 0; i < kc + cfg.verify_iters; ++i) {
                cur = evaluate(map, cur);
                if (i >= kc)
                    for (const auto& q : saddle.points)
                        best_approach = std::min(best_approach, dist(cur, q));
            }
        } catch (const OverflowError&) {
        }
        if (best_approach > cfg.converge_dist) return;
        // transversality: unstable tangent pushed to the landing point
        // against the stable graph direction there
        C2 land = x;
        Mat2 Dk{cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)};
        for (int i = 0; i < kc; ++i) {
            Dk = derivative(map, land) * Dk;
            land = evaluate(map, land);
        }
        // tangent of W^u at x via the extension chain
        int m = 0;
        cplx arg = zc;
        while (std::abs(arg) > unstable_man.validity_radius) {
            arg /= unstable_man.lambda;
            ++m;
        }
        C2 t = unstable_man.eval_deriv(arg);
        C2 xx = unstable_man.eval(arg);
        for (int i = 0; i < m * unstable_man.period; ++i) {
            Mat2 D = derivative(map, xx);
            t = mat_apply(D, t);
            xx = evaluate(map, xx);
        }
        C2 Tu = mat_apply(Dk, t);
        // stable direction at the landing point from the graph tangent
        C2 us = chart.coords(land);
        cplx dphi = series::eval(series::derivative(chart.graph), us.w);
        C2 Ts = mat_apply(chart.frame, C2{dphi, cplx(1, 0)});
        double sin_angle = std::abs(Tu.z * Ts.w - Tu.w * Ts.z) /
                           std::max(1e-300, norm_c2(Tu) * norm_c2(Ts));
        HomoclinicPoint hp;
        hp.zeta = zc;
        hp.landing_k = kc;
        hp.transversality = std::asin(std::min(1.0, sin_angle));
        hp.point = x;
        auto hres = h_of(zc, kc);
        hp.residual = hres ? std::abs(*hres) : std::numeric_limits<double>::quiet_NaN();
        if (hp.transversality >= cfg.transversality_floor)
            out.points.push_back(hp);
        else
            out.tangencies.push_back(hp);
    };
    for (int ri = 0; ri < cfg.radial_steps; ++ri) {
        double r = r1 * std::pow(r2 / r1, (ri + 0.5) / cfg.radial_steps);
        for (int ai = 0; ai < cfg.angular_steps; ++ai) {
            double ang = 2.0 * std::numbers::pi * ai / cfg.angular_steps;
            cplx zeta = r * cplx(std::cos(ang), std::sin(ang));
            for (int k = 2; k <= cfg.scan_k_max; ++k) {
                auto sol = newton_at(zeta, k);
                if (!sol) continue;
                try {
                    process_candidate(*sol);
                } catch (const OverflowError&) {
                    // candidate whose verification orbit leaves the
                    // representable range: not a homoclinic point
                }
            }
        }
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const HomoclinicPoint& a, const HomoclinicPoint& b) {
                  if (std::abs(a.zeta) != std::abs(b.zeta)) return std::abs(a.zeta) < std::abs(b.zeta);
                  return std::arg(a.zeta) < std::arg(b.zeta);
              });
    return out;
}

// --- slice geometry diagnostics ---

struct SliceGeometryReport {
    double theta = 0.0;            // angle of the best origin line
    double residual = 0.0;         // RMS distance to it / point-set diameter
    double free_theta = 0.0;       // best free line (centroid subtracted)
    double free_residual = 0.0;
    double box_dimension = 0.0;
    double box_r2 = 0.0;
    int scales_used = 0;
    bool degraded = false;         // fewer than 5 usable dyadic scales
};

namespace detail {

struct LineFit {
    double theta, rms;
};

inline LineFit tls_line(const std::vector<cplx>& pts, bool through_origin) {
    double cx = 0.0, cy = 0.0;
    if (!through_origin) {
        for (const auto& p : pts) {
            cx += p.real();
            cy += p.imag();
        }
        cx /= static_cast<double>(pts.size());
        cy /= static_cast<double>(pts.size());
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : pts) {
        double x = p.real() - cx, y = p.imag() - cy;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double c = std::cos(theta), s = std::sin(theta);
    double ss = 0.0;
    for (const auto& p : pts) {
        double x = p.real() - cx, y = p.imag() - cy;
        double d = -s * x + c * y;
        ss += d * d;
    }
    return {theta, std::sqrt(ss / static_cast<double>(pts.size()))};
}

} // namespace detail

inline SliceGeometryReport slice_geometry(const std::vector<cplx>& pts) {
    if (pts.size() < 50)
        throw std::invalid_argument("slice_geometry: needs at least 50 points");
    SliceGeometryReport rep;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        ymin = std::min(ymin, p.imag());
        ymax = std::max(ymax, p.imag());
    }
    const double diam = std::hypot(xmax - xmin, ymax - ymin);
    auto of = detail::tls_line(pts, true);
    rep.theta = of.theta;
    rep.residual = diam > 0.0 ? of.rms / diam : 0.0;
    auto ff = detail::tls_line(pts, false);
    rep.free_theta = ff.theta;
    rep.free_residual = diam > 0.0 ? ff.rms / diam : 0.0;
    // box dimension over dyadic scales diam/2^3 .. diam/2^9, skipping
    // undersampled scales (mean occupancy below 4 points per box)
    std::vector<double> logN, logInvEps;
    for (int j = 3; j <= 9; ++j) {
        double eps = diam / std::ldexp(1.0, j);
        if (eps <= 0.0) break;
        std::unordered_set<long long> boxes;
        for (const auto& p : pts) {
            long long bx = static_cast<long long>(std::floor((p.real() - xmin) / eps));
            long long by = static_cast<long long>(std::floor((p.imag() - ymin) / eps));
            boxes.insert(bx * 1000003LL + by);
        }
        auto N = static_cast<double>(boxes.size());
        if (N > static_cast<double>(pts.size()) / 4.0) break; // undersampled
        logN.push_back(std::log(N));
        logInvEps.push_back(std::log(1.0 / eps));
        if (N < 2.0) break;
    }
    rep.scales_used = static_cast<int>(logN.size());
    rep.degraded = rep.scales_used < 5;
    if (rep.scales_used >= 2) {
        double n = static_cast<double>(logN.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (size_t i = 0; i < logN.size(); ++i) {
            sx += logInvEps[i];
            sy += logN[i];
            sxx += logInvEps[i] * logInvEps[i];
            sxy += logInvEps[i] * logN[i];
            syy += logN[i] * logN[i];
        }
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.box_dimension = std::clamp(slope, 0.0, 2.0);
        double denom = (n * sxx - sx * sx) * (n * syy - sy * sy);
        rep.box_r2 = denom > 0.0 ? (n * sxy - sx * sy) * (n * sxy - sx * sy) / denom : 1.0;
    }
    return rep;
}

inline SliceGeometryReport slice_geometry(const SliceSample& s) {
    return slice_geometry(s.boundary);
}

} // namespace henon
