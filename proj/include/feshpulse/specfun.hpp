#pragma once

// Special functions backing the asymptotic spectrum formulas: Airy Ai,
// erf/erfi, normalized sinc, and a principal-value-safe reciprocal.
// Self-contained: series for small argument, asymptotic expansions for
// large argument, with a compensated (double-double) series bridging the
// cancellation-prone mid range of Ai.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "feshpulse/constants.hpp"
#include "feshpulse/errors.hpp"

namespace feshpulse {

namespace detail {

// Minimal double-double arithmetic. Only what the Airy series needs.
struct dd {
    double hi = 0.0, lo = 0.0;
};

inline dd dd_two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline dd dd_add(dd a, dd b) {
    dd s = dd_two_sum(a.hi, b.hi);
    double lo = s.lo + a.lo + b.lo;
    dd r = dd_two_sum(s.hi, lo);
    return r;
}

inline dd dd_mul_d(dd a, double b) {
    double p = a.hi * b;
    double err = std::fma(a.hi, b, -p);
    double lo = err + a.lo * b;
    return dd_two_sum(p, lo);
}

inline dd dd_div_d(dd a, double b) {
    double q1 = a.hi / b;
    double r = std::fma(-q1, b, a.hi) + a.lo;
    double q2 = r / b;
    return dd_two_sum(q1, q2);
}

// Ai(0) and -Ai'(0)
inline constexpr double airy_c1 = 0.35502805388781723926;
inline constexpr double airy_c2 = 0.25881940379280679840;

// Maclaurin series Ai(x) = c1 f(x) - c2 g(x), double precision.
inline double airy_series(double x) {
    const double x3 = x * x * x;
    double f = 1.0, g = x;
    double tf = 1.0, tg = x;
    for (int k = 0; k < 200; ++k) {
        tf *= x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
        f += tf;
        g += tg;
        if (std::fabs(tf) < 1e-20 * std::fabs(f) && std::fabs(tg) < 1e-20 * std::fabs(g))
            break;
    }
    return airy_c1 * f - airy_c2 * g;
}

// Same series accumulated in double-double; handles 4.5 < |x| < 9.5 where
// the leading-order cancellation exceeds double precision.
inline double airy_series_dd(double x) {
    const double x3 = x * x * x;
    dd f{1.0, 0.0}, g{x, 0.0};
    dd tf{1.0, 0.0}, tg{x, 0.0};
    for (int k = 0; k < 400; ++k) {
        tf = dd_div_d(dd_mul_d(tf, x3), (3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg = dd_div_d(dd_mul_d(tg, x3), (3.0 * k + 3.0) * (3.0 * k + 4.0));
        f = dd_add(f, tf);
        g = dd_add(g, tg);
        if (std::fabs(tf.hi) < 1e-36 * std::fabs(f.hi) && std::fabs(tg.hi) < 1e-36 * std::fabs(g.hi))
            break;
    }
    dd r = dd_add(dd_mul_d(f, airy_c1), dd_mul_d(g, -airy_c2));
    return r.hi + r.lo;
}

// u_k coefficients of the Airy asymptotic expansions, by recurrence.
// u_0 = 1, u_{k+1} = u_k (6k+5)(6k+3)(6k+1) / (216 (k+1)(2k+1)).
inline double airy_u_next(double u, int k) {
    return u * (6.0 * k + 5.0) * (6.0 * k + 3.0) * (6.0 * k + 1.0) /
           (216.0 * (k + 1.0) * (2.0 * k + 1.0));
}

// Decaying branch, x >= 9.5: Ai(x) = e^{-zeta} / (2 sqrt(pi) x^{1/4}) * sum.
inline double airy_asymptotic_pos(double x) {
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    double sum = 1.0, u = 1.0, term = 1.0;
    for (int k = 0; k < 60; ++k) {
        u = airy_u_next(u, k);
        double t = u / std::pow(zeta, k + 1.0);
        if (k % 2 == 0) t = -t;
        if (std::fabs(t) >= std::fabs(term)) break; // past the optimal truncation
        sum += t;
        term = t;
        if (std::fabs(t) < 1e-18 * std::fabs(sum)) break;
    }
    const double amp = 0.5 / (sqrt_pi * std::pow(x, 0.25));
    return amp * std::exp(-zeta) * sum;
}

// Oscillatory branch, x <= -9.5:
// Ai(-z) = (cos(zeta - pi/4) P(zeta) + sin(zeta - pi/4) Q(zeta)) / (sqrt(pi) z^{1/4}),
// P = sum (-1)^k u_{2k} zeta^{-2k}, Q = sum (-1)^k u_{2k+1} zeta^{-2k-1}.
inline double airy_asymptotic_neg(double x) {
    const double z = -x;
    const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    double p = 1.0, q = 0.0;
    double u = 1.0;
    double zpow = 1.0;
    double prev = 1.0;
    for (int k = 1; k <= 60; ++k) {
        u = airy_u_next(u, k - 1);
        zpow /= zeta;
        double t = u * zpow;
        if (t >= prev) break;
        prev = t;
        const int m = k / 2;
        const double s = (m % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 1)
            q += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * t;
        else
            p += s * t;
        if (t < 1e-18) break;
    }
    const double arg = zeta - 0.25 * pi;
    return (std::cos(arg) * p + std::sin(arg) * q) / (sqrt_pi * std::pow(z, 0.25));
}

} // namespace detail

struct AiryValue {
    double value = 0.0;
    bool underflow = false;
};

// Ai(x) with relative error <= 1e-10 for |x| <= 20 and phase-accurate
// oscillatory evaluation out to |x| = 1e4. Large positive x where Ai
// underflows double range reports underflow and value 0.
inline AiryValue airy_ai_checked(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("airy_ai: non-finite argument");
    double v;
    const double ax = std::fabs(x);
    if (ax <= 4.5)
        v = detail::airy_series(x);
    else if (ax < 9.5)
        v = detail::airy_series_dd(x);
    else if (x > 0.0)
        v = detail::airy_asymptotic_pos(x);
    else
        v = detail::airy_asymptotic_neg(x);
    if (x > 0.0 && std::fabs(v) < std::numeric_limits<double>::min())
        return {0.0, true};
    return {v, false};
}

inline double airy_ai(double x) { return airy_ai_checked(x).value; }

inline double erf(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("erf: non-finite argument");
    return std::erf(x);
}

namespace detail {

// erfi(x) e^{-x^2} for x >= 6, by the large-x expansion
// erfi(x) ~ e^{x^2} / (sqrt(pi) x) * sum (2k-1)!! / (2 x^2)^k.
inline double erfi_asymptotic_scaled(double x) {
    const double ix2 = 1.0 / (2.0 * x * x);
    double sum = 1.0, t = 1.0;
    for (int k = 1; k < 80; ++k) {
        t *= (2.0 * k - 1.0) * ix2;
        sum += t;
        if (t < 1e-18 * sum) break;
    }
    return sum / (sqrt_pi * x);
}

// Maclaurin erfi(x) = (2/sqrt(pi)) sum x^{2n+1} / (n! (2n+1)); all terms
// positive for x > 0, so no cancellation.
inline double erfi_series(double x) {
    const double x2 = x * x;
    double sum = x, t = x;
    for (int n = 1; n < 400; ++n) {
        t *= x2 / n;
        const double add = t / (2.0 * n + 1.0);
        sum += add;
        if (add < 1e-18 * sum) break;
    }
    return two_over_sqrt_pi * sum;
}

} // namespace detail

// e^{-x^2} erfi(x); finite for all x.
inline double erfi_scaled(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("erfi: non-finite argument");
    const double ax = std::fabs(x);
    const double s = (x < 0.0) ? -1.0 : 1.0;
    if (ax < 6.0)
        return s * std::exp(-ax * ax) * detail::erfi_series(ax);
    return s * detail::erfi_asymptotic_scaled(ax);
}

// Imaginary error function. |x| <= 26; beyond that e^{x^2} overflows and
// an erfi_overflow carrying the scaled value is thrown.
inline double erfi(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("erfi: non-finite argument");
    const double ax = std::fabs(x);
    if (ax > 26.0)
        throw erfi_overflow("erfi: result overflows double range for |x| > 26",
                            erfi_scaled(x));
    const double s = (x < 0.0) ? -1.0 : 1.0;
    if (ax < 6.0)
        return s * detail::erfi_series(ax);
    return s * std::exp(ax * ax) * detail::erfi_asymptotic_scaled(ax);
}

// sinc(x) = sin(x)/x, sinc(0) = 1.
inline double sinc(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("sinc: non-finite argument");
    const double ax = std::fabs(x);
    if (ax <= 1e-4)
        return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// Reciprocal with the principal-value convention at the origin: the
// symmetric limit drops the singular point, so pv_inverse(0) = 0.
inline double pv_inverse(double x) {
    if (x == 0.0) return 0.0;
    return 1.0 / x;
}

} // namespace feshpulse
