// Lyapunov-exponent estimators (saddle averages, tangent-vector Birkhoff
// sums) and the equidistribution statistics: per-orbit Birkhoff spectra,
// the SPer+ typicality filter, and the exponent-gap report.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "henon/core.hpp"
#include "henon/periodic.hpp"

namespace henon {

enum class ExponentMethod : uint8_t { saddle_average, birkhoff, census_weighted };

struct ExponentEstimate {
    double value = 0.0;            // nats
    ExponentMethod method = ExponentMethod::saddle_average;
    int n = 0;                     // census level or orbit length used
    double uncertainty = 0.0;
    bool low_confidence = false;
    double count_normalized = 0.0; // (1/#SPer_n) sum chi^u
    double dn_normalized = 0.0;    // (1/d^n)    sum chi^u
};

// (1/d^n) sum_{p in SPer_n} chi^u(p) from census level n, with the
// count-normalized variant alongside; uncertainty is the step difference
// against level n-1.
inline ExponentEstimate lyapunov_saddle_average(const HenonMap& map, const CensusResult& cen,
                                                int n) {
    if (n < 1 || n > static_cast<int>(cen.rows.size()))
        throw std::invalid_argument("lyapunov_saddle_average: census row missing");
    const CensusRow& row = cen.rows[static_cast<size_t>(n - 1)];
    ExponentEstimate est;
    est.method = ExponentMethod::saddle_average;
    est.n = n;
    est.dn_normalized = row.weighted_chi_u;
    est.count_normalized = row.mean_chi_u;
    est.value = est.count_normalized;
    est.low_confidence = row.low_confidence;
    if (n >= 2) {
        const CensusRow& prev = cen.rows[static_cast<size_t>(n - 2)];
        est.uncertainty = std::abs(row.mean_chi_u - prev.mean_chi_u);
        est.low_confidence = est.low_confidence || prev.low_confidence;
    } else {
        est.uncertainty = std::abs(row.mean_chi_u);
    }
    (void)map;
    return est;
}

struct BirkhoffOptions {
    long length = 2000;
    int blocks = 10;    // batch standard error over length/blocks segments
};

// Averaged log-growth of a tangent vector transported along the orbit with
// per-step renormalization (power-method alignment onto E^u).
inline ExponentEstimate lyapunov_birkhoff(const HenonMap& map, C2 x, C2 v,
                                          const BirkhoffOptions& opt = {}) {
    ExponentEstimate est;
    est.method = ExponentMethod::birkhoff;
    double nv = norm_c2(v);
    if (nv == 0.0) throw std::invalid_argument("lyapunov_birkhoff: zero start vector");
    v = {v.z / nv, v.w / nv};
    std::vector<double> logs;
    logs.reserve(static_cast<size_t>(opt.length));
    for (long i = 0; i < opt.length; ++i) {
        Mat2 D;
        try {
            D = derivative(map, x);
            x = evaluate(map, x);
        } catch (const OverflowError&) {
            est.low_confidence = true; // escaped: partial length reported
            break;
        }
        v = mat_apply(D, v);
        double g = norm_c2(v);
        logs.push_back(std::log(g));
        v = {v.z / g, v.w / g};
    }
    est.n = static_cast<int>(logs.size());
    if (logs.empty()) throw std::runtime_error("lyapunov_birkhoff: escaped immediately");
    est.value = std::accumulate(logs.begin(), logs.end(), 0.0) / double(logs.size());
    est.count_normalized = est.dn_normalized = est.value;
    // batch standard error
    const int B = std::max(2, opt.blocks);
    const size_t bl = logs.size() / static_cast<size_t>(B);
    if (bl >= 2) {
        std::vector<double> means;
        for (int b = 0; b < B; ++b) {
            double m = 0.0;
            for (size_t i = 0; i < bl; ++i) m += logs[static_cast<size_t>(b) * bl + i];
            means.push_back(m / double(bl));
        }
        double mm = std::accumulate(means.begin(), means.end(), 0.0) / double(B);
        double var = 0.0;
        for (double m : means) var += (m - mm) * (m - mm);
        est.uncertainty = std::sqrt(var / double(B * (B - 1)));
    } else {
        est.uncertainty = std::abs(est.value);
    }
    return est;
}

// unstable eigendirection at the orbit representative
inline C2 unstable_direction(const PeriodicOrbit& orb) {
    return detail::eigenvector_of(orb.monodromy, orb.lambda_u);
}

// --- Birkhoff spectra and the SPer+ filter ---

struct TestFunction {
    std::string name;
    std::function<double(const C2&)> fn;
};

// coordinate moments used by the equidistribution experiments
inline std::vector<TestFunction> default_test_functions() {
    return {
        {"re_z", [](const C2& x) { return x.z.real(); }},
        {"im_z", [](const C2& x) { return x.z.imag(); }},
        {"abs2_z", [](const C2& x) { return std::norm(x.z); }},
        {"re_zw", [](const C2& x) { return (x.z * x.w).real(); }},
        {"abs2_w", [](const C2& x) { return std::norm(x.w); }},
    };
}

struct SpectrumOrbitRow {
    int exact_period = 0;
    bool saddle = false;
    double chi_u = 0.0;               // phi_0 Birkhoff sum (independent transport route)
    std::vector<double> sums;         // S_n phi_i per test function
    bool in_mask = false;
};

struct BirkhoffSpectrum {
    int n = 0;
    std::vector<std::string> names;
    std::vector<SpectrumOrbitRow> rows;
    std::vector<double> reference;    // per function
    std::vector<double> dispersion;   // weighted std across SPer_n points, per function
    double rho_n = 0.0;
    int j_n = 0;
    long long mask_points = 0;
    double mask_ratio = 0.0;          // #SPer+_n / d^n
    std::vector<double> scales;       // sup-normalization constants per function
};

// S_n phi over one orbit: average of phi over n consecutive orbit points
// (the exact cycle repeated n / period times).
inline double birkhoff_sum(const TestFunction& f, const PeriodicOrbit& orb) {
    double s = 0.0;
    for (const auto& x : orb.points) s += f.fn(x);
    return s / static_cast<double>(orb.points.size());
}

// phi_0 = log ||Df(e^u)|| summed along the cycle by transporting the
// unstable direction; equals chi^u but through an independent route.
inline double birkhoff_phi0(const HenonMap& map, const PeriodicOrbit& orb) {
    C2 v = unstable_direction(orb);
    double s = 0.0;
    for (const auto& x : orb.points) {
        Mat2 D = derivative(map, x);
        v = mat_apply(D, v);
        double g = norm_c2(v);
        s += std::log(g);
        v = {v.z / g, v.w / g};
    }
    return s / static_cast<double>(orb.points.size());
}

inline BirkhoffSpectrum birkhoff_spectrum(const HenonMap& map, int n, const FindResult& level,
                                          const std::vector<TestFunction>& fns,
                                          const std::vector<double>& reference, double rho_n,
                                          int j_n) {
    BirkhoffSpectrum sp;
    sp.n = n;
    sp.rho_n = rho_n;
    sp.j_n = std::min<int>(j_n, static_cast<int>(fns.size()));
    for (const auto& f : fns) sp.names.push_back(f.name);
    sp.reference = reference;
    long long dn = 1;
    for (int i = 0; i < n; ++i) dn *= map.degree();
    for (const auto& orb : level.orbits) {
        SpectrumOrbitRow row;
        row.exact_period = orb.period;
        row.saddle = orb.cls == OrbitClass::saddle;
        row.chi_u = birkhoff_phi0(map, orb);
        for (const auto& f : fns) row.sums.push_back(birkhoff_sum(f, orb));
        if (row.saddle) {
            row.in_mask = true;
            for (int i = 0; i < sp.j_n; ++i)
                if (std::abs(row.sums[static_cast<size_t>(i)] -
                             reference[static_cast<size_t>(i)]) > rho_n)
                    row.in_mask = false;
        }
        sp.rows.push_back(std::move(row));
    }
    // weighted dispersion across saddle points and the mask ratio
    sp.dispersion.assign(fns.size(), 0.0);
    std::vector<double> mean(fns.size(), 0.0);
    long long spts = 0;
    for (const auto& row : sp.rows) {
        if (!row.saddle) continue;
        spts += row.exact_period;
        for (size_t i = 0; i < fns.size(); ++i) mean[i] += row.exact_period * row.sums[i];
    }
    if (spts > 0) {
        for (auto& m : mean) m /= static_cast<double>(spts);
        for (const auto& row : sp.rows) {
            if (!row.saddle) continue;
            for (size_t i = 0; i < fns.size(); ++i) {
                double d = row.sums[i] - mean[i];
                sp.dispersion[i] += row.exact_period * d * d;
            }
        }
        for (auto& d : sp.dispersion) d = std::sqrt(d / static_cast<double>(spts));
    }
    for (const auto& row : sp.rows)
        if (row.in_mask) sp.mask_points += row.exact_period;
    sp.mask_ratio = static_cast<double>(sp.mask_points) / static_cast<double>(dn);
    return sp;
}

struct SpectrumSchedule {
    // rho_n = n^{-1/4}: the explicit decay-rate budget available for smooth
    // observables on these maps
    std::function<double(int)> rho = [](int n) { return std::pow(double(n), -0.25); };
    int j_max = 0;         // 0: all functions
    bool normalize = true; // sup-normalize observables over the sampled orbit set
};

// Spectra for n = 2..n_max. References come from the highest census level;
// observables are sup-normalized over the sampled orbit set so the rho_n
// windows act on comparable scales; j_n is grown adaptively so that the
// mask ratio is nondecreasing.
inline std::vector<BirkhoffSpectrum> spectrum_series(const HenonMap& map, const CensusResult& cen,
                                                     const std::vector<TestFunction>& raw_fns,
                                                     const SpectrumSchedule& sched = {}) {
    const int n_max = static_cast<int>(cen.rows.size());
    if (n_max < 2) throw std::invalid_argument("spectrum_series: census must reach n >= 2");
    const FindResult& top = cen.by_n.back();
    // per-function sup over the sampled orbit points
    std::vector<double> scale(raw_fns.size(), 1.0);
    if (sched.normalize) {
        for (size_t i = 0; i < raw_fns.size(); ++i) {
            double sup = 0.0;
            for (const auto& level : cen.by_n)
                for (const auto& orb : level.orbits)
                    for (const auto& x : orb.points)
                        sup = std::max(sup, std::abs(raw_fns[i].fn(x)));
            scale[i] = std::max(sup, 1e-9);
        }
    }
    std::vector<TestFunction> fns;
    for (size_t i = 0; i < raw_fns.size(); ++i) {
        double s = scale[i];
        auto raw = raw_fns[i].fn;
        fns.push_back({raw_fns[i].name, [raw, s](const C2& x) { return raw(x) / s; }});
    }
    // references from the deepest level: weighted saddle averages
    std::vector<double> ref(fns.size(), 0.0);
    {
        long long spts = 0;
        for (const auto& orb : top.orbits) {
            if (orb.cls != OrbitClass::saddle) continue;
            spts += orb.period;
            for (size_t i = 0; i < fns.size(); ++i)
                ref[i] += orb.period * birkhoff_sum(fns[i], orb);
        }
        if (spts == 0) throw std::runtime_error("spectrum_series: no saddles at the top level");
        for (auto& r : ref) r /= static_cast<double>(spts);
    }
    const int jcap = sched.j_max > 0 ? std::min<int>(sched.j_max, int(fns.size()))
                                     : static_cast<int>(fns.size());
    std::vector<BirkhoffSpectrum> out;
    double prev_ratio = -1.0;
    for (int n = 2; n <= n_max; ++n) {
        const FindResult& level = cen.by_n[static_cast<size_t>(n - 1)];
        double rho = sched.rho(n);
        // j_n: the largest constraint prefix that keeps the mask ratio from
        // dropping. When even a single constraint would shrink the mask
        // below the previous level (a newly arrived atypical orbit straddles
        // the window), the prefix collapses to empty for that level; the
        // reported j_n column makes those levels visible.
        BirkhoffSpectrum chosen;
        for (int j = jcap; j >= 0; --j) {
            BirkhoffSpectrum sp = birkhoff_spectrum(map, n, level, fns, ref, rho, j);
            if (sp.mask_ratio >= prev_ratio || j == 0) {
                chosen = std::move(sp);
                break;
            }
        }
        chosen.scales = scale;
        prev_ratio = std::max(prev_ratio, chosen.mask_ratio);
        out.push_back(std::move(chosen));
    }
    return out;
}

// --- exponent gap report (hypotheses of the number-field criteria) ---

struct GapReport {
    double chi_min = 0.0, chi_max = 0.0;
    int min_period = 0, max_period = 0;
    std::string min_witness, max_witness; // canonical representatives
    double chi_mu_hat = 0.0;              // saddle average at the deepest level
    double chi_mu_uncertainty = 0.0;
    double multiplier_allowance = 1e-6;
    bool gap_81 = false; // two saddles with distinct exponents beyond allowance
    bool gap_82 = false; // max exponent above the measure estimate beyond uncertainty
    bool low_confidence = false;
};

inline std::string orbit_witness(const PeriodicOrbit& o) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "period=%d rep=(%.17g,%.17g,%.17g,%.17g)", o.period,
                  o.points[0].z.real(), o.points[0].z.imag(), o.points[0].w.real(),
                  o.points[0].w.imag());
    return buf;
}

inline GapReport lyapunov_gap_report(const HenonMap& map, const CensusResult& cen) {
    GapReport rep;
    bool first = true;
    for (const auto& level : cen.by_n) {
        for (const auto& orb : level.orbits) {
            if (orb.cls != OrbitClass::saddle) continue;
            if (first || orb.chi_u < rep.chi_min) {
                rep.chi_min = orb.chi_u;
                rep.min_period = orb.period;
                rep.min_witness = orbit_witness(orb);
            }
            if (first || orb.chi_u > rep.chi_max) {
                rep.chi_max = orb.chi_u;
                rep.max_period = orb.period;
                rep.max_witness = orbit_witness(orb);
            }
            first = false;
        }
    }
    if (first) throw std::runtime_error("lyapunov_gap_report: no saddles found");
    const int n_top = static_cast<int>(cen.rows.size());
    ExponentEstimate est = lyapunov_saddle_average(map, cen, n_top);
    rep.chi_mu_hat = est.value;
    rep.chi_mu_uncertainty = est.uncertainty;
    rep.low_confidence = est.low_confidence;
    rep.gap_81 = (rep.chi_max - rep.chi_min) > 2.0 * rep.multiplier_allowance;
    rep.gap_82 = (rep.chi_max - rep.chi_mu_hat) >
                 (rep.chi_mu_uncertainty + rep.multiplier_allowance);
    return rep;
}

} // namespace henon
