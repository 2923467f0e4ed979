// Homoclinic shadowing: orbit segments through a homoclinic excursion,
// closed into genuine periodic orbits by the cyclic Newton solver, and the
// multiplier asymptotics lambda^u(q_n) ~ c' lambda^u(p)^n extracted from
// the resulting family.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "henon/core.hpp"
#include "henon/manifolds.hpp"
#include "henon/periodic.hpp"

namespace henon {

struct PseudoOrbit {
    std::vector<C2> points;   // x_{-Nb} .. x_{k+Nf-1}, consecutive under f
    int backward_depth = 0;   // Nb
    int forward_depth = 0;    // Nf
    int landing_k = 0;        // k: iterates from tau_0 into W^s_loc
    int period = 0;           // Nb + Nf + k
    cplx zeta{};              // tau_0 = psi^u(zeta)
    cplx zeta_s{};            // stable parameter of the landing point
    double closing_gap = 0.0; // chart distance between wrap-around endpoints
    double residual_max = 0.0; // max ||f(x_i) - x_{i+1}|| over the segment
    bool extended = false;    // points computed through the double-double path
};

struct PseudoOrbitError : std::runtime_error {
    int minimal_N;
    PseudoOrbitError(const std::string& msg, int nmin)
        : std::runtime_error(msg), minimal_N(nmin) {}
};

namespace detail {

// stable parameter of a point on (or near) W^s_loc via the reversion series
inline cplx stable_parameter(const SaddleChart& chart, const C2& x) {
    C2 us = chart.coords(x);
    return series::eval(chart.zeta_of_s, us.w);
}

inline bool inside_chart(const SaddleChart& chart, const C2& x, double frac = 0.9) {
    C2 us = chart.coords(x);
    return std::max(std::abs(us.z), std::abs(us.w)) < frac * chart.s_radius;
}

// --- double-double mirrors of the few pieces the extended path needs ---

inline dd_complex dd_pow_int(dd_complex base, int e) {
    bool inv = e < 0;
    unsigned long k = inv ? static_cast<unsigned long>(-(long)e) : static_cast<unsigned long>(e);
    dd_complex acc(1.0, 0.0);
    dd_complex b = base;
    while (k) {
        if (k & 1UL) acc = acc * b;
        b = b * b;
        k >>= 1UL;
    }
    if (inv) acc = dd_complex(1.0, 0.0) / acc;
    return acc;
}

inline C2dd manifold_eval_dd(const LocalManifold& man, dd_complex zeta) {
    dd_complex z(0.0, 0.0), w(0.0, 0.0);
    for (size_t k = man.coeffs.size(); k-- > 0;) {
        z = z * zeta + from_cplx<dd_complex>(man.coeffs[k].z);
        w = w * zeta + from_cplx<dd_complex>(man.coeffs[k].w);
    }
    return {z, w};
}

inline C2dd extend_dd(const HenonMap& map, const LocalManifold& man, dd_complex zeta) {
    int m = 0;
    dd_complex lam = from_cplx<dd_complex>(man.lambda);
    while (abs_approx(zeta) > man.validity_radius) {
        zeta = man.unstable ? zeta / lam : zeta * lam;
        ++m;
        if (m > 4000) throw std::runtime_error("extend_dd: argument reduction failed");
    }
    C2dd x = manifold_eval_dd(man, zeta);
    for (int i = 0; i < m * man.period; ++i)
        x = man.unstable ? evaluate(map, x) : evaluate_inverse(map, x);
    return x;
}

inline C2dd chart_coords_dd(const SaddleChart& ch, const C2dd& x) {
    C2dd d{x.z - from_cplx<dd_complex>(ch.p.z), x.w - from_cplx<dd_complex>(ch.p.w)};
    Mat2T<dd_complex> inv{from_cplx<dd_complex>(ch.inv.m00), from_cplx<dd_complex>(ch.inv.m01),
                          from_cplx<dd_complex>(ch.inv.m10), from_cplx<dd_complex>(ch.inv.m11)};
    return mat_apply(inv, d);
}

inline dd_complex series_eval_dd(const series::Series& s, dd_complex x) {
    dd_complex acc(0.0, 0.0);
    for (size_t k = s.size(); k-- > 0;) acc = acc * x + from_cplx<dd_complex>(s[k]);
    return acc;
}

} // namespace detail

// Orbit segment x_{-Nb}, ..., tau_0, ..., f^k(tau_0), ..., x_{k+Nf-1}.
// Backward points come from the unstable parametrization at arguments
// lambda^{-j} zeta, the forward tail from the stable parametrization at
// the landing parameter; no long iteration chains, so every point carries
// only local solver error.
inline PseudoOrbit build_pseudo_orbit_asym(const HenonMap& map, const LocalManifold& u_man,
                                           const LocalManifold& s_man, const SaddleChart& chart,
                                           const HomoclinicPoint& h, int backward_depth,
                                           int forward_depth, bool extended = false) {
    if (backward_depth < 1 || forward_depth < 1)
        throw std::invalid_argument("build_pseudo_orbit: depths must be >= 1");
    const int k = h.landing_k;
    const cplx lu = u_man.lambda;
    const cplx ls = s_man.lambda;
    PseudoOrbit po;
    po.backward_depth = backward_depth;
    po.forward_depth = forward_depth;
    po.landing_k = k;
    po.period = backward_depth + forward_depth + k;
    po.zeta = h.zeta;
    po.extended = extended;
    // landing parameter
    C2 land = extend(map, u_man, h.zeta);
    for (int i = 0; i < k; ++i) land = evaluate(map, land);
    po.zeta_s = detail::stable_parameter(chart, land);
    // endpoint admissibility
    C2 head = extend(map, u_man, h.zeta * std::pow(lu, -backward_depth));
    C2 tail = s_man.eval(po.zeta_s * std::pow(ls, forward_depth - 1));
    if (!detail::inside_chart(chart, head) || !detail::inside_chart(chart, tail)) {
        int nmin = backward_depth;
        for (int N = backward_depth; N <= backward_depth + 64; ++N) {
            C2 hh = extend(map, u_man, h.zeta * std::pow(lu, -N));
            C2 tt = s_man.eval(po.zeta_s * std::pow(ls, N - 1));
            if (detail::inside_chart(chart, hh) && detail::inside_chart(chart, tt)) {
                nmin = N;
                break;
            }
        }
        throw PseudoOrbitError("build_pseudo_orbit: endpoint outside the saddle chart", nmin);
    }
    po.points.reserve(static_cast<size_t>(po.period));
    if (!extended) {
        for (int j = backward_depth; j >= 1; --j)
            po.points.push_back(extend(map, u_man, h.zeta * std::pow(lu, -j)));
        C2 cur = extend(map, u_man, h.zeta);
        for (int j = 0; j < k; ++j) {
            po.points.push_back(cur);
            cur = evaluate(map, cur);
        }
        for (int j = 0; j < forward_depth; ++j)
            po.points.push_back(s_man.eval(po.zeta_s * std::pow(ls, j)));
        C2 after_tail = s_man.eval(po.zeta_s * std::pow(ls, forward_depth));
        C2 us_head = chart.coords(po.points.front());
        C2 us_tail = chart.coords(after_tail);
        po.closing_gap =
            std::hypot(std::abs(us_head.z - us_tail.z), std::abs(us_head.w - us_tail.w));
    } else {
        // double-double pipeline: same construction, points rounded on store,
        // gap measured before rounding
        dd_complex zeta_dd = from_cplx<dd_complex>(h.zeta);
        dd_complex lu_dd = from_cplx<dd_complex>(lu);
        dd_complex ls_dd = from_cplx<dd_complex>(ls);
        C2dd land_dd = detail::extend_dd(map, u_man, zeta_dd);
        for (int i = 0; i < k; ++i) land_dd = evaluate(map, land_dd);
        dd_complex zs_dd = detail::series_eval_dd(chart.zeta_of_s,
                                                  detail::chart_coords_dd(chart, land_dd).w);
        po.zeta_s = to_cplx(zs_dd);
        for (int j = backward_depth; j >= 1; --j)
            po.points.push_back(
                to_c2(detail::extend_dd(map, u_man, zeta_dd * detail::dd_pow_int(lu_dd, -j))));
        C2dd cur = detail::extend_dd(map, u_man, zeta_dd);
        for (int j = 0; j < k; ++j) {
            po.points.push_back(to_c2(cur));
            cur = evaluate(map, cur);
        }
        for (int j = 0; j < forward_depth; ++j)
            po.points.push_back(
                to_c2(detail::manifold_eval_dd(s_man, zs_dd * detail::dd_pow_int(ls_dd, j))));
        C2dd after_tail =
            detail::manifold_eval_dd(s_man, zs_dd * detail::dd_pow_int(ls_dd, forward_depth));
        C2dd us_head = detail::chart_coords_dd(
            chart, C2dd{from_cplx<dd_complex>(po.points.front().z),
                        from_cplx<dd_complex>(po.points.front().w)});
        C2dd us_tail = detail::chart_coords_dd(chart, after_tail);
        po.closing_gap = std::hypot(abs_approx(us_head.z - us_tail.z),
                                    abs_approx(us_head.w - us_tail.w));
    }
    po.residual_max = 0.0;
    for (size_t i = 0; i + 1 < po.points.size(); ++i)
        po.residual_max = std::max(po.residual_max,
                                   dist(evaluate(map, po.points[i]), po.points[i + 1]));
    return po;
}

inline PseudoOrbit build_pseudo_orbit(const HenonMap& map, const LocalManifold& u_man,
                                      const LocalManifold& s_man, const SaddleChart& chart,
                                      const HomoclinicPoint& h, int N, bool extended = false) {
    return build_pseudo_orbit_asym(map, u_man, s_man, chart, h, N, N, extended);
}

struct ClosingConfig {
    double seed_gap_max = 0.5;
    NewtonConfig newton{};
};

struct ClosingOutcome {
    bool success = false;
    std::string failure;
    double achieved_residual = 0.0;
    PeriodicOrbit orbit;          // valid when success
    double mid_shadow_dist = 0.0; // |q_mid - tau_0|
    double seed_correction_max = 0.0;
    double correction_over_gap = 0.0;
};

// Close the gap at the saddle chart (unstable coordinate from the head of
// the segment, stable coordinate from the image of the tail) and run the
// cyclic Newton solver on the resulting period-(Nb+Nf+k) seed.
inline ClosingOutcome close_orbit(const HenonMap& map, const SaddleChart& chart,
                                  const LocalManifold& s_man, const PseudoOrbit& po,
                                  const ClosingConfig& cfg = {}) {
    ClosingOutcome out;
    if (po.closing_gap > cfg.seed_gap_max) {
        out.failure = "closing_gap above seed_gap_max";
        return out;
    }
    std::vector<C2> seed = po.points;
    C2 after_tail = s_man.eval(po.zeta_s * std::pow(s_man.lambda, po.forward_depth));
    C2 us_head = chart.coords(seed.front());
    C2 us_tail = chart.coords(after_tail);
    C2 combined = mat_apply(chart.frame, C2{us_head.z, us_tail.w});
    seed.front() = {chart.p.z + combined.z, chart.p.w + combined.w};
    auto sol = detail::newton_cyclic(map, seed, cfg.newton);
    if (!sol) {
        out.failure = "newton divergence";
        double res = 0.0;
        for (size_t i = 0; i < seed.size(); ++i)
            res = std::max(res, dist(evaluate(map, seed[i]), seed[(i + 1) % seed.size()]));
        out.achieved_residual = res;
        return out;
    }
    const auto& cyc = *sol;
    double res = 0.0;
    for (size_t i = 0; i < cyc.size(); ++i)
        res = std::max(res, dist(evaluate(map, cyc[i]), cyc[(i + 1) % cyc.size()]));
    out.achieved_residual = res;
    // no lower-period collapse allowed
    double scale_tol = 1e-6;
    int m = detail::exact_period_of(cyc, scale_tol);
    if (m != po.period) {
        out.failure = "collapsed to period " + std::to_string(m);
        return out;
    }
    out.mid_shadow_dist = dist(cyc[static_cast<size_t>(po.backward_depth)],
                               po.points[static_cast<size_t>(po.backward_depth)]);
    for (size_t i = 0; i < cyc.size(); ++i)
        out.seed_correction_max = std::max(out.seed_correction_max, dist(cyc[i], po.points[i]));
    out.correction_over_gap =
        po.closing_gap > 0.0 ? out.seed_correction_max / po.closing_gap : 0.0;
    PeriodicOrbit orb;
    orb.found_period = po.period;
    orb.period = po.period;
    orb.lower_period = false;
    orb.points = detail::rotate_to_canonical(cyc);
    orb.residual = res;
    classify_orbit(map, orb, cfg.newton.neutral_band);
    out.orbit = std::move(orb);
    out.success = true;
    return out;
}

struct AsymptoticsRow {
    int n = 0;              // period 2N+k or 2N+k-1
    int N = 0;
    int parity = 0;         // 0: n == 2N+k, 1: shifted variant
    double log_abs_lambda_u = 0.0, arg_lambda_u = 0.0;
    double log_abs_lambda_s = 0.0, arg_lambda_s = 0.0;
    cplx normalized_ratio{};   // lambda_u(q_n) / lambda_u(p)^n
    cplx normalized_ratio_s{}; // lambda_s(q_n) / lambda_s(p)^n
    cplx succ_ratio{};         // lambda_u(q_n) / lambda_u(q_{n-1}), n-consecutive
    double succ_ratio_abs = 0.0;
    double mid_shadow_dist = 0.0;
    double closing_gap = 0.0;
    double residual = 0.0;
};

struct AsymptoticsTable {
    std::vector<AsymptoticsRow> rows; // sorted by n
    int k = 0;
    cplx lambda_u_p{}, lambda_s_p{};
    cplx c_prime{};          // last normalized unstable ratio
    cplx c_stable{};         // last normalized stable ratio
    double spread_last3 = 1e9;   // max relative spread of the last three unstable ratios
    double spread_last3_s = 1e9; // same, stable side
    bool partial = false;    // fewer closings than requested
    std::vector<std::string> failures;
};

struct AsymptoticsConfig {
    ClosingConfig closing{};
    bool include_shifted = true;  // odd-parity rows
    double dd_threshold_bits = 120.0; // switch to extended pseudo-orbits past this
};

inline AsymptoticsTable multiplier_asymptotics(const HenonMap& map, const PeriodicOrbit& saddle,
                                               const LocalManifold& u_man,
                                               const LocalManifold& s_man,
                                               const SaddleChart& chart, const HomoclinicPoint& h,
                                               int N_min, int N_max,
                                               const AsymptoticsConfig& cfg = {}) {
    AsymptoticsTable tab;
    tab.k = h.landing_k;
    tab.lambda_u_p = saddle.lambda_u;
    tab.lambda_s_p = saddle.lambda_s;
    const double log_lu = saddle.log_abs_lambda_u;
    const double arg_lu = saddle.arg_lambda_u;
    const double log_ls = saddle.log_abs_lambda_s;
    const double arg_ls = saddle.arg_lambda_s;
    auto emit = [&](int Nb, int Nf, int N_label, int parity) {
        const int n = Nb + Nf + h.landing_k;
        const bool extended =
            n * saddle.log_abs_lambda_u > cfg.dd_threshold_bits * std::numbers::ln2;
        try {
            PseudoOrbit po = build_pseudo_orbit_asym(map, u_man, s_man, chart, h, Nb, Nf, extended);
            ClosingOutcome co = close_orbit(map, chart, s_man, po, cfg.closing);
            if (!co.success) {
                tab.failures.push_back("n=" + std::to_string(n) + ": " + co.failure);
                return false;
            }
            AsymptoticsRow row;
            row.n = n;
            row.N = N_label;
            row.parity = parity;
            row.log_abs_lambda_u = co.orbit.log_abs_lambda_u;
            row.arg_lambda_u = co.orbit.arg_lambda_u;
            row.log_abs_lambda_s = co.orbit.log_abs_lambda_s;
            row.arg_lambda_s = co.orbit.arg_lambda_s;
            auto ratio_from_logs = [](double lg, double ar) {
                return std::exp(lg) * cplx(std::cos(ar), std::sin(ar));
            };
            row.normalized_ratio = ratio_from_logs(co.orbit.log_abs_lambda_u - n * log_lu,
                                                   co.orbit.arg_lambda_u - n * arg_lu);
            row.normalized_ratio_s = ratio_from_logs(co.orbit.log_abs_lambda_s - n * log_ls,
                                                     co.orbit.arg_lambda_s - n * arg_ls);
            row.mid_shadow_dist = co.mid_shadow_dist;
            row.closing_gap = po.closing_gap;
            row.residual = co.orbit.residual;
            tab.rows.push_back(row);
            return true;
        } catch (const PseudoOrbitError& e) {
            tab.failures.push_back("n=" + std::to_string(n) + ": " + e.what());
            return false;
        }
    };
    for (int N = N_min; N <= N_max; ++N) {
        if (cfg.include_shifted && N > N_min) emit(N - 1, N, N, 1);
        if (!emit(N, N, N, 0)) break; // early stop on closing failure
    }
    std::sort(tab.rows.begin(), tab.rows.end(),
              [](const AsymptoticsRow& a, const AsymptoticsRow& b) { return a.n < b.n; });
    for (size_t i = 1; i < tab.rows.size(); ++i) {
        if (tab.rows[i].n != tab.rows[i - 1].n + 1) continue;
        double dlg = tab.rows[i].log_abs_lambda_u - tab.rows[i - 1].log_abs_lambda_u;
        double dar = tab.rows[i].arg_lambda_u - tab.rows[i - 1].arg_lambda_u;
        tab.rows[i].succ_ratio = std::exp(dlg) * cplx(std::cos(dar), std::sin(dar));
        tab.rows[i].succ_ratio_abs = std::exp(dlg);
    }
    if (tab.rows.size() >= 3) {
        tab.c_prime = tab.rows.back().normalized_ratio;
        tab.c_stable = tab.rows.back().normalized_ratio_s;
        double mx = 0.0, mxs = 0.0;
        for (size_t i = tab.rows.size() - 3; i < tab.rows.size(); ++i)
            for (size_t j = i + 1; j < tab.rows.size(); ++j) {
                mx = std::max(mx, std::abs(tab.rows[i].normalized_ratio -
                                           tab.rows[j].normalized_ratio) /
                                      std::abs(tab.c_prime));
                mxs = std::max(mxs, std::abs(tab.rows[i].normalized_ratio_s -
                                             tab.rows[j].normalized_ratio_s) /
                                        std::abs(tab.c_stable));
            }
        tab.spread_last3 = mx;
        tab.spread_last3_s = mxs;
    }
    tab.partial = tab.rows.size() < 4;
    return tab;
}

struct Nu0Estimate {
    cplx value{};
    double uncertainty = 0.0;
    int parity = 0;
    int rows_used = 0;
};

// Richardson-style limit of lambda_u(q_n) / lambda_u(p)^{2N} within one
// parity class; the two classes differ by a factor lambda_u(p)^{+-1}.
inline Nu0Estimate estimate_nu0(const AsymptoticsTable& tab, const PeriodicOrbit& saddle,
                                int parity) {
    std::vector<cplx> r;
    bool mixed_seen = false;
    for (const auto& row : tab.rows) {
        if (row.parity != parity) {
            mixed_seen = true;
            continue;
        }
        double lg = row.log_abs_lambda_u - 2.0 * row.N * saddle.log_abs_lambda_u;
        double ar = row.arg_lambda_u - 2.0 * row.N * saddle.arg_lambda_u;
        r.push_back(std::exp(lg) * cplx(std::cos(ar), std::sin(ar)));
    }
    (void)mixed_seen;
    if (r.size() < 4)
        throw std::invalid_argument("estimate_nu0: needs >= 4 rows of one parity class");
    auto extrapolate = [](const std::vector<cplx>& v) {
        const size_t m = v.size();
        cplx d1 = v[m - 1] - v[m - 2];
        cplx d0 = v[m - 2] - v[m - 3];
        if (std::abs(d0) < 1e-300) return v[m - 1];
        cplx rho = d1 / d0;
        if (std::abs(rho) >= 0.95) return v[m - 1];
        return v[m - 1] + d1 * rho / (cplx(1, 0) - rho);
    };
    Nu0Estimate est;
    est.parity = parity;
    est.rows_used = static_cast<int>(r.size());
    est.value = extrapolate(r);
    std::vector<cplx> shorter(r.begin(), r.end() - 1);
    est.uncertainty = std::abs(est.value - extrapolate(shorter));
    return est;
}

// Throwing variant on mixed-parity input, per the operation contract.
inline Nu0Estimate estimate_nu0_strict(const AsymptoticsTable& tab, const PeriodicOrbit& saddle) {
    bool has0 = false, has1 = false;
    for (const auto& row : tab.rows) (row.parity == 0 ? has0 : has1) = true;
    if (has0 && has1)
        throw std::invalid_argument(
            "estimate_nu0: mixed parity classes have different constants; filter first");
    return estimate_nu0(tab, saddle, has1 ? 1 : 0);
}

} // namespace henon
