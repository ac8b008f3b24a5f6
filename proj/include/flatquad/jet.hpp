#ifndef FLATQUAD_JET_HPP
#define FLATQUAD_JET_HPP

#include <algorithm>
#include <cmath>

namespace flatquad
{

    /// Scalar carried with its first and second time derivatives. Arithmetic and
    /// the elementary functions below apply the chain rule up to second order.
    struct Jet2
    {
        double v = 0.0;  // value
        double d1 = 0.0; // first derivative
        double d2 = 0.0; // second derivative

        constexpr Jet2() = default;
        constexpr Jet2(double value, double first = 0.0, double second = 0.0) : v(value), d1(first), d2(second) {}
    };

    inline Jet2 operator+(const Jet2 &a, const Jet2 &b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
    inline Jet2 operator-(const Jet2 &a, const Jet2 &b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
    inline Jet2 operator-(const Jet2 &a) { return {-a.v, -a.d1, -a.d2}; }

    inline Jet2 operator*(const Jet2 &a, const Jet2 &b)
    {
        return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
    }

    inline Jet2 operator*(double s, const Jet2 &a) { return {s * a.v, s * a.d1, s * a.d2}; }

    /// f(a) given f(a.v), f'(a.v), f''(a.v).
    inline Jet2 compose(const Jet2 &a, double f, double df, double ddf)
    {
        return {f, df * a.d1, ddf * a.d1 * a.d1 + df * a.d2};
    }

    inline Jet2 reciprocal(const Jet2 &a)
    {
        const double r = 1.0 / a.v;
        return compose(a, r, -r * r, 2.0 * r * r * r);
    }

    inline Jet2 operator/(const Jet2 &a, const Jet2 &b) { return a * reciprocal(b); }

    inline Jet2 sqrt(const Jet2 &a)
    {
        const double s = std::sqrt(a.v);
        return compose(a, s, 0.5 / s, -0.25 / (s * a.v));
    }

    /// asin with the value argument clamped to [-1, 1]; the derivatives are
    /// unbounded at the clamp and are returned as computed.
    inline Jet2 asin(const Jet2 &a)
    {
        const double x = std::clamp(a.v, -1.0, 1.0);
        const double q = 1.0 - x * x;
        const double inv = 1.0 / std::sqrt(q);
        return compose(a, std::asin(x), inv, x * inv / q);
    }

    inline Jet2 atan(const Jet2 &a)
    {
        const double q = 1.0 / (1.0 + a.v * a.v);
        return compose(a, std::atan(a.v), q, -2.0 * a.v * q * q);
    }

} // namespace flatquad

#endif
