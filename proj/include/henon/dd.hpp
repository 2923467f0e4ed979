// Double-double arithmetic: ~31 significant digits from pairs of doubles.
// Used as an optional extended-precision scalar behind the templated map
// evaluation routines (orbit re-verification, deep shadowing segments).
#pragma once

#include <cmath>
#include <limits>

namespace henon {

struct dd_real {
    double hi = 0.0;
    double lo = 0.0;

    constexpr dd_real() = default;
    constexpr dd_real(double h) : hi(h), lo(0.0) {}
    constexpr dd_real(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }
};

namespace detail {

// Error-free transforms; require strict IEEE double rounding.
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    double v = s - a;
    e = (a - (s - v)) + (b - v);
}

inline void quick_two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    e = b - (s - a);
}

inline void two_prod(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

} // namespace detail

inline dd_real operator+(dd_real a, dd_real b) {
    double s, e;
    detail::two_sum(a.hi, b.hi, s, e);
    e += a.lo + b.lo;
    detail::quick_two_sum(s, e, s, e);
    return {s, e};
}

inline dd_real operator-(dd_real a) { return {-a.hi, -a.lo}; }
inline dd_real operator-(dd_real a, dd_real b) { return a + (-b); }

inline dd_real operator*(dd_real a, dd_real b) {
    double p, e;
    detail::two_prod(a.hi, b.hi, p, e);
    e += a.hi * b.lo + a.lo * b.hi;
    detail::quick_two_sum(p, e, p, e);
    return {p, e};
}

inline dd_real operator/(dd_real a, dd_real b) {
    double q1 = a.hi / b.hi;
    dd_real r = a - b * dd_real(q1);
    double q2 = r.hi / b.hi;
    r = r - b * dd_real(q2);
    double q3 = r.hi / b.hi;
    double s, e;
    detail::quick_two_sum(q1, q2, s, e);
    dd_real q(s, e);
    return q + dd_real(q3);
}

inline dd_real& operator+=(dd_real& a, dd_real b) { return a = a + b; }
inline dd_real& operator-=(dd_real& a, dd_real b) { return a = a - b; }
inline dd_real& operator*=(dd_real& a, dd_real b) { return a = a * b; }
inline dd_real& operator/=(dd_real& a, dd_real b) { return a = a / b; }

inline bool operator<(dd_real a, dd_real b) {
    return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(dd_real a, dd_real b) { return b < a; }
inline bool operator<=(dd_real a, dd_real b) { return !(b < a); }
inline bool operator>=(dd_real a, dd_real b) { return !(a < b); }
inline bool operator==(dd_real a, dd_real b) { return a.hi == b.hi && a.lo == b.lo; }

inline dd_real abs(dd_real a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline dd_real sqrt(dd_real a) {
    if (a.hi == 0.0 && a.lo == 0.0) return {};
    double x = std::sqrt(a.hi);
    // one Newton step in dd: x' = (x + a/x) / 2
    dd_real xd(x);
    dd_real r = (xd + a / xd) * dd_real(0.5);
    return r;
}

// Minimal complex type over dd_real (std::complex is only specified for
// the builtin floating types).
struct dd_complex {
    dd_real re, im;

    constexpr dd_complex() = default;
    constexpr dd_complex(dd_real r) : re(r), im(0.0) {}
    constexpr dd_complex(dd_real r, dd_real i) : re(r), im(i) {}
    constexpr dd_complex(double r, double i = 0.0) : re(r), im(i) {}
};

inline dd_complex operator+(dd_complex a, dd_complex b) { return {a.re + b.re, a.im + b.im}; }
inline dd_complex operator-(dd_complex a, dd_complex b) { return {a.re - b.re, a.im - b.im}; }
inline dd_complex operator-(dd_complex a) { return {-a.re, -a.im}; }

inline dd_complex operator*(dd_complex a, dd_complex b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline dd_complex operator/(dd_complex a, dd_complex b) {
    dd_real den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

inline dd_complex& operator+=(dd_complex& a, dd_complex b) { return a = a + b; }
inline dd_complex& operator-=(dd_complex& a, dd_complex b) { return a = a - b; }
inline dd_complex& operator*=(dd_complex& a, dd_complex b) { return a = a * b; }

inline dd_real norm(dd_complex a) { return a.re * a.re + a.im * a.im; }
inline dd_real abs(dd_complex a) { return sqrt(norm(a)); }

inline double to_double(dd_real a) { return a.hi + a.lo; }

} // namespace henon
