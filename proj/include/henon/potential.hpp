// Dynamical Green functions G+-, the Bottcher coordinate near infinity,
// and sampled restrictions of G+ to holomorphic transversal disks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "henon/core.hpp"
#include "henon/parallel.hpp"

namespace henon {

enum class GreenStatus : uint8_t {
    escaping = 0,  // positive value, certified by reaching the escape region
    bounded = 1,   // stayed inside the filtration bidisk for the whole cap
    undecided = 2, // cap exhausted without a verdict
};

struct GreenValue {
    double value = 0.0;
    GreenStatus status = GreenStatus::undecided;
    long entry_step = -1; // first iterate inside the escape region, -1 if none
};

namespace detail {

// Factor-form step (z,w) |-> (a*w + lead*z^d + sum c_j z^j, z). The forward
// chain is the map itself (lead = 1); the inverse chain is f^{-1} conjugated
// by the coordinate swap, which makes the polynomial non-monic.
struct ChainStep {
    cplx a;
    cplx lead;
    std::vector<cplx> coeffs;
    int degree;

    cplx poly(cplx z) const {
        cplx acc = lead * z;
        for (int k = degree - 2; k >= 0; --k) {
            acc *= z;
            acc += coeffs[static_cast<size_t>(k)];
        }
        return acc;
    }
};

struct Chain {
    std::vector<ChainStep> steps;
    long long total_degree = 1;
    double radius = 1.0;       // escape region {|z| >= max(|w|, radius)}
    double tail_per_pass = 0.0; // S = sum_i log|lead_i| / prod_{j<=i} d_j

    cplx step_apply_z(size_t i, const C2& x) const {
        return steps[i].poly(x.z) + steps[i].a * x.w;
    }
};

inline double chain_step_radius(const ChainStep& s) {
    std::vector<double> low(s.coeffs.size());
    for (size_t j = 0; j < low.size(); ++j) low[j] = std::abs(s.coeffs[j]);
    const double al = std::abs(s.lead);
    // escape: |lead| z^d - sum - (|a|+2) z >= 0, scaled to monic
    std::vector<double> esc(low);
    for (auto& v : esc) v /= al;
    double r_escape = positive_root(esc, s.degree, (std::abs(s.a) + 2.0) / al);
    // ratio certificate: |z'/(lead z^d) - 1| <= 1/2
    std::vector<double> geo(low);
    for (auto& v : geo) v *= 2.0 / al;
    double r_geo = positive_root(geo, s.degree, 2.0 * std::abs(s.a) / al);
    return std::max(r_escape, r_geo);
}

inline Chain forward_chain(const HenonMap& map) {
    Chain c;
    for (const auto& f : map.factors()) {
        c.steps.push_back({f.a(), cplx(1.0, 0.0), f.coeffs(), f.degree()});
        c.total_degree *= f.degree();
    }
    double dprod = 1.0;
    for (const auto& s : c.steps) {
        dprod *= s.degree;
        c.tail_per_pass += std::log(std::abs(s.lead)) / dprod;
        c.radius = std::max(c.radius, chain_step_radius(s));
    }
    return c;
}

inline Chain inverse_chain(const HenonMap& map) {
    Chain c;
    const auto& fs = map.factors();
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
        ChainStep s;
        s.a = cplx(1.0, 0.0) / it->a();
        s.lead = -cplx(1.0, 0.0) / it->a();
        s.coeffs.resize(it->coeffs().size());
        for (size_t j = 0; j < s.coeffs.size(); ++j) s.coeffs[j] = -it->coeffs()[j] / it->a();
        s.degree = it->degree();
        c.steps.push_back(std::move(s));
        c.total_degree *= it->degree();
    }
    double dprod = 1.0;
    for (const auto& s : c.steps) {
        dprod *= s.degree;
        c.tail_per_pass += std::log(std::abs(s.lead)) / dprod;
        c.radius = std::max(c.radius, chain_step_radius(s));
    }
    return c;
}

inline double reduce_arg(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

} // namespace detail

// Shared evaluator caching the factor chains and certified radii; all
// methods are const and safe to call concurrently.
class GreenEvaluator {
public:
    struct Options {
        double tol = 1e-8;
        long cap = 2000;
        double ceiling = kDefaultCeiling;
        double big = 1e100; // modulus past which the series tail is closed analytically
    };

    explicit GreenEvaluator(const HenonMap& map)
        : GreenEvaluator(map, Options{}) {}
    GreenEvaluator(const HenonMap& map, const Options& opt)
        : map_(map), opt_(opt), fwd_(detail::forward_chain(map)), bwd_(detail::inverse_chain(map)) {}

    const HenonMap& map() const { return map_; }
    double forward_radius() const { return fwd_.radius; }
    double backward_radius() const { return bwd_.radius; }
    const Options& options() const { return opt_; }

    GreenValue plus(const C2& x) const { return eval_chain(fwd_, x); }

    GreenValue minus(const C2& x) const {
        return eval_chain(bwd_, C2{x.w, x.z}); // swap conjugation
    }

    // phi+ on V+ via per-factor principal logarithms of near-1 ratios;
    // log|phi+| equals G+ and phi+ o f = (phi+)^d by telescoping.
    cplx bottcher_plus(const C2& x) const {
        if (!in_forward_escape_region(x, fwd_.radius))
            throw std::domain_error("bottcher_plus: point not certified inside V+");
        cplx log_phi = std::log(x.z);
        double weight = 1.0;
        C2 cur = x;
        for (long pass = 0; pass < opt_.cap; ++pass) {
            if (std::abs(cur.z) >= opt_.big) break;
            for (size_t i = 0; i < fwd_.steps.size(); ++i) {
                const auto& s = fwd_.steps[i];
                cplx znext = fwd_.step_apply_z(i, cur);
                cplx v = std::log(znext) - double(s.degree) * std::log(cur.z);
                v = {v.real(), detail::reduce_arg(v.imag())};
                weight /= s.degree;
                log_phi += weight * v;
                cur = {znext, cur.z};
            }
        }
        return std::exp(log_phi);
    }

private:
    GreenValue eval_chain(const detail::Chain& ch, C2 x) const {
        const double R = ch.radius;
        const double box = std::max(fwd_.radius, bwd_.radius);
        GreenValue out;
        long n0 = 0;
        bool stayed_in_box = true;
        while (!in_forward_escape_region(x, R)) {
            if (std::max(std::abs(x.z), std::abs(x.w)) >= opt_.ceiling) {
                // past the representable range before formally entering the
                // escape region; the coarse bound is within a factor d of G
                out.value = std::log(std::max(std::abs(x.z), std::abs(x.w))) *
                            std::pow(static_cast<double>(ch.total_degree),
                                     -static_cast<double>(n0));
                out.status = GreenStatus::escaping;
                out.entry_step = n0;
                return out;
            }
            if (n0 >= opt_.cap) {
                out.value = 0.0;
                out.status = stayed_in_box ? GreenStatus::bounded : GreenStatus::undecided;
                return out;
            }
            C2 y = x;
            for (size_t i = 0; i < ch.steps.size(); ++i) {
                cplx znext = ch.step_apply_z(i, y);
                y = {znext, y.z};
            }
            x = y;
            ++n0;
            if (std::max(std::abs(x.z), std::abs(x.w)) > box) stayed_in_box = false;
        }
        // series G = D^{-n0} * (log|z| + sum of weighted per-step log-ratios)
        double g = std::log(std::abs(x.z));
        double weight = 1.0;
        const double D = static_cast<double>(ch.total_degree);
        for (long pass = 0; pass < opt_.cap; ++pass) {
            if (std::abs(x.z) >= opt_.big) {
                g += weight * ch.tail_per_pass * D / (D - 1.0);
                break;
            }
            for (size_t i = 0; i < ch.steps.size(); ++i) {
                const auto& s = ch.steps[i];
                cplx znext = ch.step_apply_z(i, x);
                double lr = std::log(std::abs(znext)) - s.degree * std::log(std::abs(x.z));
                weight /= s.degree;
                g += weight * lr;
                x = {znext, x.z};
            }
        }
        out.value = g * std::pow(D, -static_cast<double>(n0));
        if (out.value < 0.0) out.value = 0.0; // rounding guard; G is >= 0
        out.status = GreenStatus::escaping;
        out.entry_step = n0;
        return out;
    }

    const HenonMap& map_;
    Options opt_;
    detail::Chain fwd_;
    detail::Chain bwd_;
};

inline GreenValue green_plus(const HenonMap& map, const C2& x, double tol = 1e-8, long cap = 2000) {
    GreenEvaluator::Options o;
    o.tol = tol;
    o.cap = cap;
    return GreenEvaluator(map, o).plus(x);
}

inline GreenValue green_minus(const HenonMap& map, const C2& x, double tol = 1e-8, long cap = 2000) {
    GreenEvaluator::Options o;
    o.tol = tol;
    o.cap = cap;
    return GreenEvaluator(map, o).minus(x);
}

inline cplx bottcher_plus(const HenonMap& map, const C2& x) {
    return GreenEvaluator(map).bottcher_plus(x);
}

// --- transversal slices ---

struct TransversalDisk {
    C2 center{};
    C2 tangent{};   // unit vector in C^2
    double radius = 1.0;

    C2 at(cplx zeta) const {
        return {center.z + zeta * tangent.z, center.w + zeta * tangent.w};
    }
};

inline TransversalDisk make_disk(const C2& center, C2 tangent, double radius) {
    double n = norm_c2(tangent);
    if (n == 0.0) throw std::invalid_argument("TransversalDisk: zero tangent");
    tangent.z /= n;
    tangent.w /= n;
    return {center, tangent, radius};
}

struct SliceSample {
    int resolution = 0;
    double radius = 0.0;
    double zero_threshold = 0.0;
    std::vector<double> values;       // res x res row-major; NaN outside the disk
    std::vector<uint8_t> status;      // GreenStatus per cell, 255 outside
    std::vector<cplx> boundary;       // zeta values of extracted J+_Gamma cells
    std::vector<int> boundary_index;  // flat indices of those cells
    bool nonharmonic = false;
    double rescale = 1.0;             // extra factor recorded by unstable slices

    cplx zeta_at(int i, int j) const {
        double step = 2.0 * radius / (resolution - 1);
        return {-radius + step * j, -radius + step * i};
    }
};

// Fill a grid over |zeta| <= radius from a GreenValue-returning callable,
// then extract the zero-threshold crossing cells.
template <class GreenFn>
SliceSample slice_from_green_fn(GreenFn&& green_at, double radius, int resolution, double tol,
                                int threads = 1) {
    if (resolution < 16) throw std::invalid_argument("slice_green: resolution must be >= 16");
    SliceSample s;
    s.resolution = resolution;
    s.radius = radius;
    s.zero_threshold = 10.0 * tol;
    s.values.assign(static_cast<size_t>(resolution) * resolution,
                    std::numeric_limits<double>::quiet_NaN());
    s.status.assign(static_cast<size_t>(resolution) * resolution, 255);
    parallel_for(threads, resolution, [&](long i) {
        for (int j = 0; j < resolution; ++j) {
            cplx zeta = s.zeta_at(static_cast<int>(i), j);
            if (std::abs(zeta) > radius) continue;
            GreenValue g = green_at(zeta);
            size_t idx = static_cast<size_t>(i) * resolution + j;
            s.values[idx] = g.value;
            s.status[idx] = static_cast<uint8_t>(g.status);
        }
    });
    bool has_zero = false, has_pos = false;
    for (double v : s.values) {
        if (std::isnan(v)) continue;
        (v < s.zero_threshold ? has_zero : has_pos) = true;
    }
    s.nonharmonic = has_zero && has_pos;
    // boundary: below-threshold cell with a 4-neighbor at or above threshold
    auto cell = [&](int i, int j) -> double {
        if (i < 0 || j < 0 || i >= resolution || j >= resolution)
            return std::numeric_limits<double>::quiet_NaN();
        return s.values[static_cast<size_t>(i) * resolution + j];
    };
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            double v = cell(i, j);
            if (std::isnan(v) || v >= s.zero_threshold) continue;
            const double nb[4] = {cell(i - 1, j), cell(i + 1, j), cell(i, j - 1), cell(i, j + 1)};
            bool crossing = false;
            for (double q : nb)
                if (!std::isnan(q) && q >= s.zero_threshold) crossing = true;
            if (crossing) {
                s.boundary.push_back(s.zeta_at(i, j));
                s.boundary_index.push_back(i * resolution + j);
            }
        }
    }
    return s;
}

template <class Param>
SliceSample slice_green_param(const GreenEvaluator& ev, Param&& param, double radius,
                              int resolution, double tol, int threads = 1) {
    return slice_from_green_fn([&](cplx zeta) { return ev.plus(param(zeta)); }, radius,
                               resolution, tol, threads);
}

inline SliceSample slice_green(const HenonMap& map, const TransversalDisk& disk, int resolution,
                               double tol, long cap = 2000, int threads = 1) {
    GreenEvaluator::Options o;
    o.tol = tol;
    o.cap = cap;
    GreenEvaluator ev(map, o);
    return slice_green_param(ev, [&](cplx zeta) { return disk.at(zeta); }, disk.radius,
                             resolution, tol, threads);
}

// Grayscale G+ heat map with the extracted boundary overlaid, binary PPM P6.
// Returns the full file contents so callers control where bytes land.
inline std::vector<uint8_t> render_slice_ppm(const SliceSample& s) {
    const int n = s.resolution;
    std::string header = "P6\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    double vmax = 0.0;
    for (double v : s.values)
        if (!std::isnan(v)) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;
    std::vector<uint8_t> is_boundary(static_cast<size_t>(n) * n, 0);
    for (int idx : s.boundary_index) is_boundary[static_cast<size_t>(idx)] = 1;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            size_t idx = static_cast<size_t>(i) * n + j;
            uint8_t r, g, b;
            if (is_boundary[idx]) {
                r = 255; g = 32; b = 32;
            } else if (std::isnan(s.values[idx])) {
                r = g = b = 0;
            } else if (s.values[idx] < s.zero_threshold) {
                r = g = b = 16; // bounded region
            } else {
                double t = std::sqrt(s.values[idx] / vmax);
                auto q = static_cast<uint8_t>(40.0 + 215.0 * std::min(1.0, t));
                r = g = b = q;
            }
            out.push_back(r);
            out.push_back(g);
            out.push_back(b);
        }
    }
    return out;
}

} // namespace henon
