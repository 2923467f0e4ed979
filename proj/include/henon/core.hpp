// Compositions of complex Henon maps (z,w) |-> (a*w + p(z), z): exact
// evaluation, inverses, derivatives, signed iteration with escape reports,
// and the filtration radius certifying the escape region V+.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "henon/dd.hpp"

namespace henon {

using cplx = std::complex<double>;

inline constexpr double kDefaultCeiling = 1e150;

template <class C>
struct C2T {
    C z{};
    C w{};
};

using C2 = C2T<cplx>;
using C2dd = C2T<dd_complex>;

// 2x2 complex matrix, row major. Heavy linear algebra goes through Eigen;
// this stays template-friendly for the dd path.
template <class C>
struct Mat2T {
    C m00{}, m01{}, m10{}, m11{};

    C det() const { return m00 * m11 - m01 * m10; }
    C trace() const { return m00 + m11; }
};

using Mat2 = Mat2T<cplx>;

template <class C>
Mat2T<C> operator*(const Mat2T<C>& A, const Mat2T<C>& B) {
    return {A.m00 * B.m00 + A.m01 * B.m10, A.m00 * B.m01 + A.m01 * B.m11,
            A.m10 * B.m00 + A.m11 * B.m10, A.m10 * B.m01 + A.m11 * B.m11};
}

template <class C>
C2T<C> mat_apply(const Mat2T<C>& A, const C2T<C>& v) {
    return {A.m00 * v.z + A.m01 * v.w, A.m10 * v.z + A.m11 * v.w};
}

// --- scalar adapters shared by the double and double-double paths ---

inline double abs_approx(const cplx& c) { return std::abs(c); }
inline double abs_approx(const dd_complex& c) { return std::hypot(c.re.hi, c.im.hi); }

template <class C>
C from_cplx(const cplx& c);
template <>
inline cplx from_cplx<cplx>(const cplx& c) { return c; }
template <>
inline dd_complex from_cplx<dd_complex>(const cplx& c) { return {c.real(), c.imag()}; }

inline cplx to_cplx(const cplx& c) { return c; }
inline cplx to_cplx(const dd_complex& c) { return {to_double(c.re), to_double(c.im)}; }

template <class C>
C2 to_c2(const C2T<C>& x) { return {to_cplx(x.z), to_cplx(x.w)}; }

struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One Henon factor f(z,w) = (a*w + p(z), z), p monic of degree >= 2 with
// no degree-(d-1) term: p(z) = z^d + c_{d-2} z^{d-2} + ... + c_0.
class HenonFactor {
public:
    HenonFactor(cplx a, std::vector<cplx> coeffs) : a_(a), coeffs_(std::move(coeffs)) {
        if (a_ == cplx(0.0, 0.0))
            throw std::invalid_argument("HenonFactor: linear coefficient a must be nonzero");
        if (coeffs_.empty())
            throw std::invalid_argument("HenonFactor: degree must be >= 2 (need c_0..c_{d-2})");
    }

    const cplx& a() const { return a_; }
    const std::vector<cplx>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) + 1; }

    template <class C>
    C poly(const C& z) const {
        // monic, missing the z^{d-1} term
        C acc = z;               // will become z^d via Horner over d steps
        const int d = degree();
        for (int k = d - 2; k >= 0; --k) {
            acc = acc * z;
            if (k <= d - 2) acc = acc + from_cplx<C>(coeffs_[static_cast<size_t>(k)]);
        }
        return acc;
    }

    template <class C>
    C poly_deriv(const C& z) const {
        const int d = degree();
        C acc = from_cplx<C>(cplx(static_cast<double>(d), 0.0)) * z;
        for (int k = d - 2; k >= 1; --k) {
            acc = acc * z;
            acc = acc + from_cplx<C>(static_cast<double>(k) * coeffs_[static_cast<size_t>(k)]);
        }
        return acc;
    }

private:
    cplx a_;
    std::vector<cplx> coeffs_;
};

// Ordered composition of Henon factors, applied first-to-last.
class HenonMap {
public:
    explicit HenonMap(std::vector<HenonFactor> factors) : factors_(std::move(factors)) {
        if (factors_.empty())
            throw std::invalid_argument("HenonMap: needs at least one factor");
        degree_ = 1;
        jacobian_ = cplx(1.0, 0.0);
        for (const auto& f : factors_) {
            degree_ *= f.degree();
            jacobian_ *= -f.a();
        }
    }

    const std::vector<HenonFactor>& factors() const { return factors_; }
    long long degree() const { return degree_; }
    cplx jacobian() const { return jacobian_; }

private:
    std::vector<HenonFactor> factors_;
    long long degree_ = 1;
    cplx jacobian_ = 1.0;
};

struct EscapeReport {
    long steps = 0;   // iterations applied before the ceiling was crossed
    C2 last{};        // last point with both moduli below the ceiling
    bool backward = false;
};

namespace detail {

template <class C>
bool below_ceiling(const C2T<C>& x, double ceiling) {
    return abs_approx(x.z) < ceiling && abs_approx(x.w) < ceiling;
}

} // namespace detail

template <class C>
C2T<C> evaluate(const HenonMap& map, C2T<C> x, double ceiling = kDefaultCeiling) {
    for (const auto& f : map.factors()) {
        C2T<C> y{f.template poly<C>(x.z) + from_cplx<C>(f.a()) * x.w, x.z};
        if (!detail::below_ceiling(y, ceiling))
            throw OverflowError("evaluate: intermediate modulus exceeded ceiling");
        x = y;
    }
    return x;
}

template <class C>
C2T<C> evaluate_inverse(const HenonMap& map, C2T<C> x, double ceiling = kDefaultCeiling) {
    const auto& fs = map.factors();
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
        C2T<C> y{x.w, (x.z - it->template poly<C>(x.w)) / from_cplx<C>(it->a())};
        if (!detail::below_ceiling(y, ceiling))
            throw OverflowError("evaluate_inverse: intermediate modulus exceeded ceiling");
        x = y;
    }
    return x;
}

// Df at x; chain rule over factors, each factor contributing
// [[p'(z), a], [1, 0]].
template <class C>
Mat2T<C> derivative(const HenonMap& map, C2T<C> x, double ceiling = kDefaultCeiling) {
    Mat2T<C> J{from_cplx<C>(cplx(1, 0)), from_cplx<C>(cplx(0, 0)),
               from_cplx<C>(cplx(0, 0)), from_cplx<C>(cplx(1, 0))};
    for (const auto& f : map.factors()) {
        Mat2T<C> Df{f.template poly_deriv<C>(x.z), from_cplx<C>(f.a()),
                    from_cplx<C>(cplx(1, 0)), from_cplx<C>(cplx(0, 0))};
        J = Df * J;
        C2T<C> y{f.template poly<C>(x.z) + from_cplx<C>(f.a()) * x.w, x.z};
        if (!detail::below_ceiling(y, ceiling))
            throw OverflowError("derivative: intermediate modulus exceeded ceiling");
        x = y;
    }
    return J;
}

// Df^{-1} at x (derivative of the inverse map).
template <class C>
Mat2T<C> derivative_inverse(const HenonMap& map, C2T<C> x, double ceiling = kDefaultCeiling) {
    Mat2T<C> J{from_cplx<C>(cplx(1, 0)), from_cplx<C>(cplx(0, 0)),
               from_cplx<C>(cplx(0, 0)), from_cplx<C>(cplx(1, 0))};
    const auto& fs = map.factors();
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
        const C inv_a = from_cplx<C>(cplx(1, 0)) / from_cplx<C>(it->a());
        C2T<C> y{x.w, (x.z - it->template poly<C>(x.w)) * inv_a};
        Mat2T<C> Dg{from_cplx<C>(cplx(0, 0)), from_cplx<C>(cplx(1, 0)),
                    inv_a, -(it->template poly_deriv<C>(x.w)) * inv_a};
        J = Dg * J;
        if (!detail::below_ceiling(y, ceiling))
            throw OverflowError("derivative_inverse: intermediate modulus exceeded ceiling");
        x = y;
    }
    return J;
}

// Non-template conveniences so braced C2 literals work at call sites.
inline C2 evaluate(const HenonMap& map, const C2& x, double ceiling = kDefaultCeiling) {
    return evaluate<cplx>(map, x, ceiling);
}
inline C2 evaluate_inverse(const HenonMap& map, const C2& x, double ceiling = kDefaultCeiling) {
    return evaluate_inverse<cplx>(map, x, ceiling);
}
inline Mat2 derivative(const HenonMap& map, const C2& x, double ceiling = kDefaultCeiling) {
    return derivative<cplx>(map, x, ceiling);
}
inline Mat2 derivative_inverse(const HenonMap& map, const C2& x, double ceiling = kDefaultCeiling) {
    return derivative_inverse<cplx>(map, x, ceiling);
}

using IterateResult = std::variant<C2, EscapeReport>;

// n-fold forward (n > 0) or backward (n < 0) application. Escape is a
// valid outcome, reported rather than thrown.
inline IterateResult iterate(const HenonMap& map, C2 x, long n,
                             double ceiling = kDefaultCeiling) {
    const bool backward = n < 0;
    const long steps = backward ? -n : n;
    for (long i = 0; i < steps; ++i) {
        try {
            x = backward ? evaluate_inverse(map, x, ceiling) : evaluate(map, x, ceiling);
        } catch (const OverflowError&) {
            return EscapeReport{i, x, backward};
        }
    }
    return x;
}

namespace detail {

// Smallest R >= 1 with q(R) >= 0, q increasing past its positive root.
inline double positive_root(const std::vector<double>& poly_low, int degree, double coef_lin) {
    // q(R) = R^degree - sum_j poly_low[j] R^j - coef_lin * R, all poly_low >= 0
    auto q = [&](double r) {
        double v = 1.0;
        for (int i = 0; i < degree; ++i) v *= r;
        for (size_t j = 0; j < poly_low.size(); ++j) {
            double t = poly_low[j];
            for (size_t i = 0; i < j; ++i) t *= r;
            v -= t;
        }
        return v - coef_lin * r;
    };
    double lo = 1.0, hi = 2.0;
    while (q(hi) < 0.0) hi *= 2.0;
    if (q(lo) >= 0.0) return lo;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (q(mid) >= 0.0 ? hi : lo) = mid;
    }
    return hi;
}

inline double factor_forward_radius(const HenonFactor& f) {
    std::vector<double> low(f.coeffs().size());
    for (size_t j = 0; j < low.size(); ++j) low[j] = std::abs(f.coeffs()[j]);
    // escape: |p(z)| - |a||w| >= 2|z| on |z| >= max(|w|, R)
    double r_escape = positive_root(low, f.degree(), std::abs(f.a()) + 2.0);
    // geometric growth |z'| >= |z|^d / 2
    std::vector<double> low2 = low;
    for (auto& v : low2) v *= 2.0;
    double r_geo = positive_root(low2, f.degree(), 2.0 * std::abs(f.a()));
    return std::max(r_escape, r_geo);
}

inline double factor_backward_radius(const HenonFactor& f) {
    std::vector<double> low(f.coeffs().size());
    for (size_t j = 0; j < low.size(); ++j) low[j] = std::abs(f.coeffs()[j]);
    // escape for the inverse branch: |p(w)| - |z| >= (1 + 2|a|)|w| gives
    // |w'| >= 2|w| on |w| >= max(|z|, R)
    double r_escape = positive_root(low, f.degree(), 1.0 + 2.0 * std::abs(f.a()));
    std::vector<double> low2 = low;
    for (auto& v : low2) v *= 2.0;
    double r_geo = positive_root(low2, f.degree(), 2.0);
    return std::max(r_escape, r_geo);
}

} // namespace detail

// R such that V+ = {|z| >= max(|w|, R)} is forward invariant with
// |z| at least doubling per factor application.
inline double filtration_radius(const HenonMap& map) {
    double r = 1.0;
    for (const auto& f : map.factors()) r = std::max(r, detail::factor_forward_radius(f));
    return r;
}

// Mirror region V- = {|w| >= max(|z|, R)} for backward iteration.
inline double filtration_radius_backward(const HenonMap& map) {
    double r = 1.0;
    for (const auto& f : map.factors()) r = std::max(r, detail::factor_backward_radius(f));
    return r;
}

inline bool in_forward_escape_region(const C2& x, double radius) {
    double az = std::abs(x.z);
    return az >= radius && az >= std::abs(x.w);
}

inline bool in_backward_escape_region(const C2& x, double radius) {
    double aw = std::abs(x.w);
    return aw >= radius && aw >= std::abs(x.z);
}

// Lexicographic order on (Re z, Im z, Re w, Im w); used for canonical
// orbit representatives.
inline bool lex_less(const C2& a, const C2& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    if (a.z.imag() != b.z.imag()) return a.z.imag() < b.z.imag();
    if (a.w.real() != b.w.real()) return a.w.real() < b.w.real();
    return a.w.imag() < b.w.imag();
}

inline double dist(const C2& a, const C2& b) {
    return std::hypot(std::abs(a.z - b.z), std::abs(a.w - b.w));
}

inline double norm_c2(const C2& a) { return std::hypot(std::abs(a.z), std::abs(a.w)); }

} // namespace henon
