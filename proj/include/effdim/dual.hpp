#pragma once

#include <cmath>

namespace effdim {

// First-order dual number. Running the reverse-mode gradient with Dual
// parameters seeded as (theta, v) yields exact Hessian-vector products in the
// tangent components (forward-over-reverse).
struct Dual {
    double re = 0.0;
    double du = 0.0;

    constexpr Dual() = default;
    constexpr Dual(double r) : re(r) {}
    constexpr Dual(double r, double d) : re(r), du(d) {}

    Dual& operator+=(const Dual& o) { re += o.re; du += o.du; return *this; }
    Dual& operator-=(const Dual& o) { re -= o.re; du -= o.du; return *this; }
    Dual& operator*=(const Dual& o) {
        du = du * o.re + re * o.du;
        re *= o.re;
        return *this;
    }
};

constexpr Dual operator+(Dual a, const Dual& b) { return {a.re + b.re, a.du + b.du}; }
constexpr Dual operator-(Dual a, const Dual& b) { return {a.re - b.re, a.du - b.du}; }
constexpr Dual operator-(Dual a) { return {-a.re, -a.du}; }
constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.re * b.re, a.du * b.re + a.re * b.du};
}
constexpr Dual operator/(const Dual& a, const Dual& b) {
    double inv = 1.0 / b.re;
    double q = a.re * inv;
    return {q, (a.du - q * b.du) * inv};
}

// unqualified exp/log/sqrt in effdim code must resolve for both scalar types
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }

inline Dual exp(const Dual& a) {
    double e = std::exp(a.re);
    return {e, e * a.du};
}
inline Dual log(const Dual& a) { return {std::log(a.re), a.du / a.re}; }
inline Dual sqrt(const Dual& a) {
    double s = std::sqrt(a.re);
    return {s, 0.5 * a.du / s};
}

// scalar-generic helpers used by the templated network evaluation
inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.re; }

inline double tangent_of(double) { return 0.0; }
inline double tangent_of(const Dual& x) { return x.du; }

template <class T>
inline T relu(const T& x) {
    return value_of(x) > 0.0 ? x : T(0.0);
}

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Dual& x) {
    return std::isfinite(x.re) && std::isfinite(x.du);
}

}  // namespace effdim
