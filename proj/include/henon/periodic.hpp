// Periodic orbit search (cyclic-system Newton with multistart seeding),
// multiplier extraction in log-space, classification, and the saddle
// census rows used by the equidistribution experiments.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "henon/core.hpp"
#include "henon/roots.hpp"

namespace henon {

enum class OrbitClass : uint8_t { saddle, sink, source, neutral };

struct NewtonConfig {
    double tol = 1e-12;        // accepted max residual ||f(x_i) - x_{i+1}||
    int max_iter = 80;
    double dedup_radius = 1e-7;
    double neutral_band = 1e-6;
    bool direct = false;       // fall back to Newton on f^n(x) - x
};

struct PeriodicOrbit {
    int found_period = 0;      // n of the f^n fixed-point equation that produced it
    int period = 0;            // exact period (divides found_period)
    bool lower_period = false; // exact period strictly divides found_period
    std::vector<C2> points;    // cycle, canonical representative first
    Mat2 monodromy{};          // product of Df along the exact cycle
    cplx lambda_s{}, lambda_u{};
    double log_abs_lambda_u = 0.0, arg_lambda_u = 0.0;
    double log_abs_lambda_s = 0.0, arg_lambda_s = 0.0;
    OrbitClass cls = OrbitClass::neutral;
    bool neutral_flagged = false;
    double chi_u = 0.0;        // log|lambda_u| / period
    double residual = 0.0;
};

namespace detail {

// Scaled product of Df along the cycle: monodromy = e^scale * M_hat with
// M_hat kept O(1). The small eigenvalue comes from the analytic determinant
// rather than the ill-conditioned trace difference.
struct ScaledMonodromy {
    Mat2 m_hat{};
    double log_scale = 0.0;
};

inline ScaledMonodromy monodromy_scaled(const HenonMap& map, const std::vector<C2>& cycle) {
    ScaledMonodromy out;
    out.m_hat = {cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)};
    for (const auto& x : cycle) {
        out.m_hat = derivative(map, x) * out.m_hat;
        double mx = std::max(std::max(std::abs(out.m_hat.m00), std::abs(out.m_hat.m01)),
                             std::max(std::abs(out.m_hat.m10), std::abs(out.m_hat.m11)));
        if (mx > 0.0) {
            out.m_hat.m00 /= mx;
            out.m_hat.m01 /= mx;
            out.m_hat.m10 /= mx;
            out.m_hat.m11 /= mx;
            out.log_scale += std::log(mx);
        }
    }
    return out;
}

inline double reduce_angle(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

inline C2 eigenvector_of(const Mat2& M, cplx lambda) {
    // kernel of (M - lambda I); take the numerically larger row construction
    C2 v1{M.m01, lambda - M.m00};
    C2 v2{lambda - M.m11, M.m10};
    C2 v = (norm_c2(v1) >= norm_c2(v2)) ? v1 : v2;
    double n = norm_c2(v);
    return {v.z / n, v.w / n};
}

} // namespace detail

// Eigen-data and classification for a verified cycle. Eigenvalues of the
// 2x2 monodromy via the closed-form characteristic polynomial, with the
// stable one recovered from det = jacobian^n.
inline void classify_orbit(const HenonMap& map, PeriodicOrbit& orb,
                           double neutral_band = 1e-6) {
    const int n = orb.period;
    auto sm = detail::monodromy_scaled(map, orb.points);
    const cplx tr = sm.m_hat.trace();
    // det(M_hat) = jac^n * e^{-2 scale}, formed in log-space
    const double log_det_hat = n * std::log(std::abs(map.jacobian())) - 2.0 * sm.log_scale;
    const double arg_det = detail::reduce_angle(n * std::arg(map.jacobian()));
    const cplx det_hat = std::exp(log_det_hat) * cplx(std::cos(arg_det), std::sin(arg_det));
    cplx disc = std::sqrt(tr * tr - 4.0 * det_hat);
    const cplx cand1 = 0.5 * (tr + disc), cand2 = 0.5 * (tr - disc);
    cplx big = std::abs(cand1) >= std::abs(cand2) ? cand1 : cand2;
    // lambda_u = e^scale * big; lambda_s via the determinant identity
    orb.log_abs_lambda_u = sm.log_scale + std::log(std::abs(big));
    orb.arg_lambda_u = std::arg(big);
    orb.log_abs_lambda_s = n * std::log(std::abs(map.jacobian())) - orb.log_abs_lambda_u;
    orb.arg_lambda_s = detail::reduce_angle(n * std::arg(map.jacobian()) - orb.arg_lambda_u);
    auto materialize = [](double lg, double ar) -> cplx {
        if (lg > 700.0 || lg < -700.0) return {0.0, 0.0};
        return std::exp(lg) * cplx(std::cos(ar), std::sin(ar));
    };
    orb.lambda_u = materialize(orb.log_abs_lambda_u, orb.arg_lambda_u);
    orb.lambda_s = materialize(orb.log_abs_lambda_s, orb.arg_lambda_s);
    orb.monodromy = sm.m_hat;
    if (sm.log_scale < 700.0) {
        const double es = std::exp(sm.log_scale);
        orb.monodromy.m00 *= es;
        orb.monodromy.m01 *= es;
        orb.monodromy.m10 *= es;
        orb.monodromy.m11 *= es;
    }
    orb.chi_u = orb.log_abs_lambda_u / n;
    const double du = orb.log_abs_lambda_u; // log moduli
    const double ds = orb.log_abs_lambda_s;
    orb.neutral_flagged = std::min(std::abs(std::exp(std::min(du, 700.0)) - 1.0),
                                   std::abs(std::exp(std::min(ds, 700.0)) - 1.0)) < neutral_band;
    if (orb.neutral_flagged) {
        orb.cls = OrbitClass::neutral;
    } else if (ds < 0.0 && du > 0.0) {
        orb.cls = OrbitClass::saddle;
    } else if (du < 0.0) {
        orb.cls = OrbitClass::sink;
    } else if (ds > 0.0) {
        orb.cls = OrbitClass::source;
    } else {
        // moduli on opposite sides already handled; equal moduli straddle
        // is impossible, so classify by the common side
        orb.cls = (du <= 0.0) ? OrbitClass::sink : OrbitClass::source;
    }
}

namespace detail {

inline Eigen::Vector2cd to_eigen(const C2& x) { return {x.z, x.w}; }

// Damped Newton on the cyclic system {f(x_i) - x_{i+1 mod n}}.
inline std::optional<std::vector<C2>> newton_cyclic(const HenonMap& map, std::vector<C2> cycle,
                                                    const NewtonConfig& cfg) {
    const int n = static_cast<int>(cycle.size());
    const int dim = 2 * n;
    Eigen::VectorXcd F(dim);
    auto residual_fill = [&](const std::vector<C2>& X) -> double {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            C2 y;
            try {
                y = evaluate(map, X[static_cast<size_t>(i)]);
            } catch (const OverflowError&) {
                return std::numeric_limits<double>::infinity();
            }
            const C2& nx = X[static_cast<size_t>((i + 1) % n)];
            F(2 * i) = y.z - nx.z;
            F(2 * i + 1) = y.w - nx.w;
            worst = std::max(worst, std::hypot(std::abs(F(2 * i)), std::abs(F(2 * i + 1))));
        }
        return worst;
    };
    double res = residual_fill(cycle);
    if (!std::isfinite(res)) return std::nullopt;
    Eigen::MatrixXcd J(dim, dim);
    for (int it = 0; it < cfg.max_iter; ++it) {
        if (res < cfg.tol) return cycle;
        J.setZero();
        for (int i = 0; i < n; ++i) {
            Mat2 D;
            try {
                D = derivative(map, cycle[static_cast<size_t>(i)]);
            } catch (const OverflowError&) {
                return std::nullopt;
            }
            J(2 * i, 2 * i) = D.m00;
            J(2 * i, 2 * i + 1) = D.m01;
            J(2 * i + 1, 2 * i) = D.m10;
            J(2 * i + 1, 2 * i + 1) = D.m11;
            const int j = (i + 1) % n;
            J(2 * i, 2 * j) -= 1.0;
            J(2 * i + 1, 2 * j + 1) -= 1.0;
        }
        Eigen::VectorXcd step = J.partialPivLu().solve(-F);
        if (!step.allFinite()) return std::nullopt;
        double t = 1.0;
        std::vector<C2> trial(cycle.size());
        double new_res = std::numeric_limits<double>::infinity();
        for (int back = 0; back < 12; ++back) {
            for (int i = 0; i < n; ++i) {
                trial[static_cast<size_t>(i)] = {
                    cycle[static_cast<size_t>(i)].z + t * step(2 * i),
                    cycle[static_cast<size_t>(i)].w + t * step(2 * i + 1)};
            }
            Eigen::VectorXcd keepF = F;
            new_res = residual_fill(trial);
            if (std::isfinite(new_res) && new_res < res * (1.0 - 0.25 * t)) break;
            F = keepF;
            t *= 0.5;
            new_res = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(new_res)) return std::nullopt;
        cycle = trial;
        res = new_res;
    }
    return res < cfg.tol ? std::optional(cycle) : std::nullopt;
}

// Newton on g(x) = f^n(x) - x in two unknowns.
inline std::optional<std::vector<C2>> newton_direct(const HenonMap& map, C2 x, int n,
                                                    const NewtonConfig& cfg) {
    for (int it = 0; it < cfg.max_iter; ++it) {
        C2 y = x;
        Mat2 J{cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)};
        try {
            for (int k = 0; k < n; ++k) {
                J = derivative(map, y) * J;
                y = evaluate(map, y);
            }
        } catch (const OverflowError&) {
            return std::nullopt;
        }
        cplx rz = y.z - x.z, rw = y.w - x.w;
        if (std::hypot(std::abs(rz), std::abs(rw)) < cfg.tol) {
            std::vector<C2> cycle;
            cycle.reserve(static_cast<size_t>(n));
            C2 p = x;
            for (int k = 0; k < n; ++k) {
                cycle.push_back(p);
                p = evaluate(map, p);
            }
            return cycle;
        }
        Mat2 A{J.m00 - 1.0, J.m01, J.m10, J.m11 - 1.0};
        cplx det = A.det();
        if (std::abs(det) < 1e-300) return std::nullopt;
        cplx dz = (A.m11 * rz - A.m01 * rw) / det;
        cplx dw = (-A.m10 * rz + A.m00 * rw) / det;
        x = {x.z - dz, x.w - dw};
        if (std::abs(x.z) > 1e6 || std::abs(x.w) > 1e6) return std::nullopt;
    }
    return std::nullopt;
}

inline std::vector<C2> rotate_to_canonical(std::vector<C2> cycle) {
    size_t best = 0;
    for (size_t i = 1; i < cycle.size(); ++i)
        if (lex_less(cycle[i], cycle[best])) best = i;
    std::rotate(cycle.begin(), cycle.begin() + static_cast<long>(best), cycle.end());
    return cycle;
}

inline int exact_period_of(const std::vector<C2>& cycle, double tol) {
    const int n = static_cast<int>(cycle.size());
    for (int m = 1; m < n; ++m) {
        if (n % m != 0) continue;
        bool per = true;
        for (int i = 0; i + m < n && per; ++i)
            if (dist(cycle[static_cast<size_t>(i)], cycle[static_cast<size_t>(i + m)]) > tol)
                per = false;
        if (per) return m;
    }
    return n;
}

} // namespace detail

struct SeedSet {
    std::vector<C2> points;               // turned into cycles by forward iteration
    std::vector<std::vector<C2>> cycles;  // full-cycle guesses (itinerary seeding)
};

struct FindResult {
    std::vector<PeriodicOrbit> orbits;
    double completeness = 0.0;  // (points found, with multiplicity) / d^n
    long seeds_tried = 0;
    long seeds_converged = 0;
};

inline FindResult find_periodic(const HenonMap& map, int n, const SeedSet& seeds,
                                const NewtonConfig& cfg = {}) {
    if (n < 1) throw std::invalid_argument("find_periodic: n must be >= 1");
    if (seeds.points.empty() && seeds.cycles.empty())
        throw std::invalid_argument("find_periodic: seed set is empty");
    FindResult out;
    auto try_cycle = [&](std::vector<C2> guess) {
        ++out.seeds_tried;
        std::optional<std::vector<C2>> sol;
        if (cfg.direct)
            sol = detail::newton_direct(map, guess.front(), n, cfg);
        else
            sol = detail::newton_cyclic(map, std::move(guess), cfg);
        if (!sol) return;
        ++out.seeds_converged;
        auto cycle = detail::rotate_to_canonical(*sol);
        // dedup radius scaled by the local derivative norm
        const C2& rep = cycle.front();
        Mat2 D = derivative(map, rep);
        double scale = std::max(1.0, std::sqrt(std::norm(D.m00) + std::norm(D.m01) +
                                               std::norm(D.m10) + std::norm(D.m11)));
        double rad = cfg.dedup_radius * scale;
        // cycle-set distance: every candidate point within rad of a stored point
        for (const auto& prev : out.orbits) {
            bool same = true;
            for (const auto& x : cycle) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& y : prev.points) best = std::min(best, dist(x, y));
                if (best >= rad) {
                    same = false;
                    break;
                }
            }
            if (same) return;
        }
        PeriodicOrbit orb;
        orb.found_period = n;
        int m = detail::exact_period_of(cycle, rad);
        orb.period = m;
        orb.lower_period = m < n;
        orb.points.assign(cycle.begin(), cycle.begin() + m);
        orb.points = detail::rotate_to_canonical(orb.points);
        double res = 0.0;
        for (int i = 0; i < m; ++i) {
            C2 y = evaluate(map, orb.points[static_cast<size_t>(i)]);
            res = std::max(res, dist(y, orb.points[static_cast<size_t>((i + 1) % m)]));
        }
        orb.residual = res;
        classify_orbit(map, orb, cfg.neutral_band);
        out.orbits.push_back(std::move(orb));
    };
    for (const auto& c : seeds.cycles) {
        if (static_cast<int>(c.size()) == n) try_cycle(c);
    }
    for (const auto& p : seeds.points) {
        std::vector<C2> cyc;
        cyc.reserve(static_cast<size_t>(n));
        C2 x = p;
        bool ok = true;
        for (int k = 0; k < n; ++k) {
            cyc.push_back(x);
            if (k + 1 < n) {
                try {
                    x = evaluate(map, x);
                } catch (const OverflowError&) {
                    ok = false;
                    break;
                }
                if (std::max(std::abs(x.z), std::abs(x.w)) > 1e8) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) try_cycle(std::move(cyc));
    }
    std::sort(out.orbits.begin(), out.orbits.end(),
              [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
                  return lex_less(a.points.front(), b.points.front());
              });
    long long dn = 1;
    for (int i = 0; i < n; ++i) dn *= map.degree();
    long long found_points = 0;
    for (const auto& o : out.orbits) found_points += o.period;
    out.completeness = static_cast<double>(found_points) / static_cast<double>(dn);
    return out;
}

// --- seeding ---

struct SeedOptions {
    int grid = 40;             // grid points per real axis over [-R, R]^2
    bool itineraries = true;   // symbolic seeding for single-factor maps
    int branch_sweeps = 400;
    double branch_tol = 1e-11;
};

// Backward branch iteration for single-factor maps: given a cyclic symbol
// word, solve p(z_j) = z_{j+1} - a z_{j-1} by picking the root indexed by
// the symbol, sweeping until the cycle stabilizes. Self-validating: words
// whose sweeps fail to contract are dropped.
inline std::vector<std::vector<C2>> itinerary_cycle_seeds(const HenonMap& map, int n,
                                                          const SeedOptions& opt = {}) {
    if (map.factors().size() != 1) return {};
    const HenonFactor& f = map.factors()[0];
    const int d = f.degree();
    const cplx a = f.a();
    long long words = 1;
    for (int i = 0; i < n; ++i) {
        words *= d;
        if (words > 2'000'000) return {}; // symbolic budget
    }
    // roots of p(z) = t, i.e. z^d + sum c_j z^j - t = 0
    auto branch_roots = [&](cplx t) {
        std::vector<cplx> coeffs(static_cast<size_t>(d), cplx(0, 0));
        for (size_t j = 0; j < f.coeffs().size(); ++j) coeffs[j] = f.coeffs()[j];
        coeffs[0] -= t;
        auto r = poly_roots_monic(coeffs);
        std::sort(r.begin(), r.end(), [](cplx u, cplx v) {
            double au = std::arg(u), av = std::arg(v);
            if (au != av) return au < av;
            return std::abs(u) < std::abs(v);
        });
        return r;
    };
    std::vector<std::vector<C2>> out;
    std::vector<int> word(static_cast<size_t>(n), 0);
    std::vector<cplx> z(static_cast<size_t>(n));
    for (long long widx = 0; widx < words; ++widx) {
        long long t = widx;
        for (int i = 0; i < n; ++i) {
            word[static_cast<size_t>(i)] = static_cast<int>(t % d);
            t /= d;
        }
        // init on a circle at the filtration radius scale
        double r0 = filtration_radius(map);
        for (int i = 0; i < n; ++i)
            z[static_cast<size_t>(i)] = 0.5 * r0 * (word[static_cast<size_t>(i)] * 2 >= d ? -1.0 : 1.0);
        bool converged = false;
        for (int sweep = 0; sweep < opt.branch_sweeps; ++sweep) {
            double move = 0.0;
            for (int j = n - 1; j >= 0; --j) {
                cplx target = z[static_cast<size_t>((j + 1) % n)] -
                              a * z[static_cast<size_t>((j - 1 + n) % n)];
                auto roots = branch_roots(target);
                cplx nz = roots[static_cast<size_t>(word[static_cast<size_t>(j)])];
                move = std::max(move, std::abs(nz - z[static_cast<size_t>(j)]));
                z[static_cast<size_t>(j)] = nz;
            }
            if (move < opt.branch_tol) {
                converged = true;
                break;
            }
            if (!std::isfinite(move) || move > 1e8) break;
        }
        if (!converged) continue;
        std::vector<C2> cyc(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j)
            cyc[static_cast<size_t>(j)] = {z[static_cast<size_t>(j)],
                                           z[static_cast<size_t>((j - 1 + n) % n)]};
        out.push_back(std::move(cyc));
    }
    return out;
}

// Degenerate-limit seeding for single-factor maps: period-n points of the
// one-variable polynomial p found by Newton multistart on p^n(z) - z
// (iterated evaluation, no expanded coefficients), lifted to cycles
// (z_j, z_{j-1}). Complements the branch sweeps on maps with connected
// one-dimensional Julia sets, where root labels are discontinuous.
inline std::vector<std::vector<C2>> degenerate_limit_seeds(const HenonMap& map, int n) {
    if (map.factors().size() != 1) return {};
    const HenonFactor& f = map.factors()[0];
    const int d = f.degree();
    long long dn = 1;
    for (int i = 0; i < n; ++i) {
        dn *= d;
        if (dn > 8192) return {};
    }
    auto pn_and_deriv = [&](cplx z, cplx& val, cplx& der) -> bool {
        der = cplx(1, 0);
        val = z;
        for (int k = 0; k < n; ++k) {
            der *= f.poly_deriv(val);
            val = f.poly(val);
            if (!std::isfinite(val.real()) || std::abs(val) > 1e12) return false;
        }
        return true;
    };
    double rp = 1.0;
    {
        std::vector<double> low(f.coeffs().size());
        for (size_t j = 0; j < low.size(); ++j) low[j] = std::abs(f.coeffs()[j]);
        rp = detail::positive_root(low, d, 2.0);
    }
    std::vector<cplx> roots;
    auto push_root = [&](cplx z) {
        for (const auto& r : roots)
            if (std::abs(r - z) < 1e-8) return;
        roots.push_back(z);
    };
    const double radii[] = {0.25, 0.5, 0.8, 1.0, 1.2};
    const long per_circle = 4 * dn;
    for (double rr : radii) {
        if (static_cast<long long>(roots.size()) >= dn) break;
        for (long k = 0; k < per_circle; ++k) {
            double ang = 2.0 * std::numbers::pi * k / per_circle + 0.13 * rr;
            cplx z = rr * rp * cplx(std::cos(ang), std::sin(ang));
            bool ok = true;
            for (int it = 0; it < 60; ++it) {
                cplx val, der;
                if (!pn_and_deriv(z, val, der)) {
                    ok = false;
                    break;
                }
                cplx g = val - z, gp = der - cplx(1, 0);
                if (std::abs(g) < 1e-13) break;
                if (std::abs(gp) < 1e-14) {
                    ok = false;
                    break;
                }
                cplx step = g / gp;
                if (std::abs(step) > rp) step *= rp / std::abs(step);
                z -= step;
                if (std::abs(z) > 4.0 * rp) {
                    ok = false;
                    break;
                }
            }
            cplx val, der;
            if (ok && pn_and_deriv(z, val, der) && std::abs(val - z) < 1e-10) push_root(z);
            if (static_cast<long long>(roots.size()) >= dn) break;
        }
    }
    std::vector<std::vector<C2>> out;
    out.reserve(roots.size());
    for (const auto& r : roots) {
        std::vector<C2> cyc(static_cast<size_t>(n));
        std::vector<cplx> zs(static_cast<size_t>(n));
        cplx z = r;
        for (int j = 0; j < n; ++j) {
            zs[static_cast<size_t>(j)] = z;
            z = f.poly(z);
        }
        for (int j = 0; j < n; ++j)
            cyc[static_cast<size_t>(j)] = {zs[static_cast<size_t>(j)],
                                           zs[static_cast<size_t>((j - 1 + n) % n)]};
        out.push_back(std::move(cyc));
    }
    return out;
}

inline SeedSet standard_seeds(const HenonMap& map, int n, const SeedOptions& opt = {}) {
    SeedSet s;
    const double R = filtration_radius(map);
    const int g = std::max(2, opt.grid);
    s.points.reserve(static_cast<size_t>(g) * g);
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            double u = -R + 2.0 * R * i / (g - 1);
            double v = -R + 2.0 * R * j / (g - 1);
            s.points.push_back({cplx(u, 0), cplx(v, 0)});
        }
    }
    if (opt.itineraries) {
        s.cycles = itinerary_cycle_seeds(map, n, opt);
        auto extra = degenerate_limit_seeds(map, n);
        s.cycles.insert(s.cycles.end(), extra.begin(), extra.end());
    }
    return s;
}

// --- census ---

struct CensusRow {
    int n = 0;
    long long fix_count = 0;   // #Fix_n found (points, period dividing n)
    long long sper_count = 0;  // saddles among them
    double ratio = 0.0;        // sper_count / d^n
    double mean_chi_u = 0.0;   // average chi^u over SPer_n points
    double weighted_chi_u = 0.0; // d^{-n} sum chi^u
    bool low_confidence = false;
};

struct CensusConfig {
    NewtonConfig newton{};
    SeedOptions seeds{};
    long long slack = 0;
};

struct CensusResult {
    std::vector<CensusRow> rows;
    std::vector<FindResult> by_n; // index 0 <-> n = 1
};

inline CensusResult census(const HenonMap& map, int n_max, const CensusConfig& cfg = {}) {
    if (n_max < 1) throw std::invalid_argument("census: n_max must be >= 1");
    CensusResult out;
    for (int n = 1; n <= n_max; ++n) {
        FindResult fr = find_periodic(map, n, standard_seeds(map, n, cfg.seeds), cfg.newton);
        CensusRow row;
        row.n = n;
        long long dn = 1;
        for (int i = 0; i < n; ++i) dn *= map.degree();
        double chi_sum = 0.0;
        for (const auto& o : fr.orbits) {
            row.fix_count += o.period;
            if (o.cls == OrbitClass::saddle) {
                row.sper_count += o.period;
                chi_sum += o.period * o.chi_u;
            }
        }
        row.ratio = static_cast<double>(row.sper_count) / static_cast<double>(dn);
        row.mean_chi_u = row.sper_count > 0 ? chi_sum / static_cast<double>(row.sper_count) : 0.0;
        row.weighted_chi_u = chi_sum / static_cast<double>(dn);
        row.low_confidence = row.fix_count < dn - cfg.slack;
        out.rows.push_back(row);
        out.by_n.push_back(std::move(fr));
    }
    return out;
}

// Residual recheck under double-double evaluation.
inline double orbit_residual_dd(const HenonMap& map, const PeriodicOrbit& orb) {
    double worst = 0.0;
    const int m = orb.period;
    for (int i = 0; i < m; ++i) {
        const C2& xi = orb.points[static_cast<size_t>(i)];
        const C2& xn = orb.points[static_cast<size_t>((i + 1) % m)];
        C2dd x{from_cplx<dd_complex>(xi.z), from_cplx<dd_complex>(xi.w)};
        C2dd y = evaluate(map, x);
        C2 yd = to_c2(y);
        worst = std::max(worst, dist(yd, xn));
    }
    return worst;
}

} // namespace henon
