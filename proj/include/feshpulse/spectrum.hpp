#pragma once

// Numerical evaluation of the regularized Fourier transform of the
// uncoupled closed-channel amplitude,
//     value(wT) = C0~(omega + E0/hbar) / T
//               = int dt e^{i wT t} e^{-i eps phi(t)}   (t in units of T),
// for wT > 0. The infinite plateau tails are summed in closed form by
// adiabatic switching:
//     +i e^{i(wT t_hi - eps phi(+inf))} / wT  - i e^{i(wT t_lo - eps phi(-inf))} / wT,
// which reproduces the square-pulse spectrum sinc((wT-eps)/2) eps/wT exactly.
// The core integral is done chunkwise with Gauss-Kronrod 15 panels no wider
// than one local oscillation period.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "feshpulse/errors.hpp"
#include "feshpulse/pulse.hpp"

namespace feshpulse {

enum class SpectrumMethod { numeric, airy_uniform, stationary_phase, square_closed, convolved };

inline const char* to_string(SpectrumMethod m) {
    switch (m) {
        case SpectrumMethod::numeric: return "numeric";
        case SpectrumMethod::airy_uniform: return "airy_uniform";
        case SpectrumMethod::stationary_phase: return "stationary_phase";
        case SpectrumMethod::square_closed: return "square_closed";
        case SpectrumMethod::convolved: return "convolved";
    }
    return "?";
}

enum PointFlag : std::uint8_t {
    point_ok = 0,
    point_no_stationary = 1, // no real stationary point at this frequency
    point_near_caustic = 2,  // |P'(t_w)| below the singular-point guard
};

struct SpectrumGrid {
    std::vector<double> omega_T;               // dimensionless, strictly increasing, > 0
    std::vector<std::complex<double>> values;  // C0~(omega + E0/hbar)/T
    SpectrumMethod method = SpectrumMethod::numeric;
    DimensionlessDrive drive;
    std::vector<std::uint8_t> point_flags;     // empty when every point is valid
    bool reliability_warning = false;          // asymptotics used below validity floor
    double achieved_tol = 0.0;                 // max estimated abs quadrature error

    std::size_t size() const { return omega_T.size(); }
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (!(lo < hi) || n < 2) throw config_error("grid: need lo < hi and >= 2 points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

// (0, hi] sampled at hi*k/n, k = 1..n; excludes the delta location wT = 0.
inline std::vector<double> default_omega_grid(double hi, std::size_t n = 4096) {
    if (!(hi > 0.0) || n < 2) throw config_error("grid: need hi > 0");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = hi * static_cast<double>(i + 1) / static_cast<double>(n);
    return g;
}

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights (QUADPACK dqk15).
inline constexpr double gk_xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double gk_wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gk_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Integrand {
    const PhaseFunction& phase;
    double eps, wT;
    std::complex<double> operator()(double t) const {
        const double arg = wT * t - eps * phase.phase(t);
        return {std::cos(arg), std::sin(arg)};
    }
    double frequency(double t) const { return std::fabs(wT - eps * phase.pulse(t)); }
};

struct GKResult {
    std::complex<double> integral;
    double error;
};

template <typename F>
GKResult gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::complex<double> fc = f(c);
    std::complex<double> resk = gk_wgk[7] * fc;
    std::complex<double> resg = gk_wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const std::complex<double> f1 = f(c - h * gk_xgk[i]);
        const std::complex<double> f2 = f(c + h * gk_xgk[i]);
        resk += gk_wgk[i] * (f1 + f2);
        if (i % 2 == 1) resg += gk_wg[i / 2] * (f1 + f2);
    }
    resk *= h;
    resg *= h;
    return {resk, std::abs(resk - resg)};
}

template <typename F>
void gk_adaptive(const F& f, double a, double b, double tol, int depth,
                 std::complex<double>& acc, double& err_acc) {
    const GKResult r = gk15(f, a, b);
    if (r.error <= tol || depth >= 24) {
        acc += r.integral;
        err_acc += r.error;
        return;
    }
    const double m = 0.5 * (a + b);
    gk_adaptive(f, a, m, 0.5 * tol, depth + 1, acc, err_acc);
    gk_adaptive(f, m, b, 0.5 * tol, depth + 1, acc, err_acc);
}

// Segment boundaries: core cut points, pulse kinks, and the roots of
// P(t) = wT/eps where the local oscillation stalls.
inline std::vector<double> segment_bounds(const PhaseFunction& phase, double eps,
                                          double wT) {
    const double lo = phase.core_lo(), hi = phase.core_hi();
    std::vector<double> b{lo, hi};
    for (double x : phase.breakpoints())
        if (x > lo && x < hi) b.push_back(x);
    if (eps > 0.0) {
        const double nu = wT / eps;
        const int n = 1024;
        double pt = lo, pv = phase.pulse(lo) - nu;
        for (int i = 1; i <= n; ++i) {
            const double t = lo + (hi - lo) * i / n;
            const double v = phase.pulse(t) - nu;
            if ((pv <= 0.0) != (v <= 0.0)) {
                double x0 = pt, x1 = t;
                for (int k = 0; k < 60; ++k) {
                    const double m = 0.5 * (x0 + x1);
                    if ((phase.pulse(x0) - nu <= 0.0) != (phase.pulse(m) - nu <= 0.0))
                        x1 = m;
                    else
                        x0 = m;
                }
                b.push_back(0.5 * (x0 + x1));
            }
            pt = t;
            pv = v;
        }
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(),
                        [&](double x, double y) { return y - x < 1e-12 * (hi - lo); }),
            b.end());
    return b;
}

inline double segment_max_frequency(const Integrand& f, double a, double b) {
    double m = 0.0;
    for (int i = 0; i <= 4; ++i)
        m = std::max(m, f.frequency(a + (b - a) * i / 4.0));
    return std::max(m, 1e-3);
}

} // namespace detail

// Regularized plateau tails at the cut points.
inline std::complex<double> plateau_tails(const PhaseFunction& phase, double eps,
                                          double wT) {
    const std::complex<double> i(0.0, 1.0);
    const double phi_inf = phase.phi_infinity();
    const double ah = wT * phase.core_hi() - eps * phi_inf;
    const double al = wT * phase.core_lo() + eps * phi_inf;
    return (i / wT) * (std::complex<double>(std::cos(ah), std::sin(ah)) -
                       std::complex<double>(std::cos(al), std::sin(al)));
}

struct QuadratureOptions {
    double abs_tol = 1e-10;     // per-point absolute target (scaled by 1 + 2/wT)
    int min_chunks = 1;
};

// Oscillation-resolving evaluation of the spectrum on a grid of wT > 0.
// Accurate to ~1e-6 relative wherever |value| is not negligible, for
// eps up to 1e4.
inline SpectrumGrid spectrum_numeric(const PhaseFunction& phase,
                                     const DimensionlessDrive& drive,
                                     std::vector<double> omega_T,
                                     const QuadratureOptions& opt = {}) {
    SpectrumGrid out;
    out.method = SpectrumMethod::numeric;
    out.drive = drive;
    out.values.resize(omega_T.size());
    const double eps = drive.epsilon;
    const double core_w = phase.core_hi() - phase.core_lo();
    double worst = 0.0;
    for (std::size_t idx = 0; idx < omega_T.size(); ++idx) {
        const double wT = omega_T[idx];
        if (!(wT > 0.0))
            throw std::domain_error(
                "spectrum_numeric: wT = 0 is the delta-function location; grids must "
                "stay strictly positive");
        const detail::Integrand f{phase, eps, wT};
        const double tol_point = opt.abs_tol * (1.0 + 2.0 / wT);
        std::complex<double> acc(0.0, 0.0);
        double err = 0.0;
        const auto bounds = detail::segment_bounds(phase, eps, wT);
        for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
            const double a = bounds[s], b = bounds[s + 1];
            const double fmax = detail::segment_max_frequency(f, a, b);
            int n = static_cast<int>(std::ceil((b - a) * fmax / two_pi)) + 1;
            n = std::max(n, opt.min_chunks);
            for (int c = 0; c < n; ++c) {
                const double ca = a + (b - a) * c / n;
                const double cb = a + (b - a) * (c + 1) / n;
                detail::gk_adaptive(f, ca, cb, tol_point * (cb - ca) / core_w, 0, acc,
                                    err);
            }
        }
        if (err > std::max(1e-7, 100.0 * tol_point))
            throw numeric_error("spectrum_numeric: quadrature did not converge", err);
        out.values[idx] = acc + plateau_tails(phase, eps, wT);
        worst = std::max(worst, err);
    }
    out.omega_T = std::move(omega_T);
    out.achieved_tol = worst;
    return out;
}

// Brute-force reference integrator: composite Simpson with at least 40
// nodes per local oscillation wavelength, same tail regularization.
// Kept deliberately independent of the adaptive path; test use only.
inline SpectrumGrid quadrature_oracle(const PhaseFunction& phase,
                                      const DimensionlessDrive& drive,
                                      std::vector<double> omega_T) {
    SpectrumGrid out;
    out.method = SpectrumMethod::numeric;
    out.drive = drive;
    out.values.resize(omega_T.size());
    const double eps = drive.epsilon;
    for (std::size_t idx = 0; idx < omega_T.size(); ++idx) {
        const double wT = omega_T[idx];
        if (!(wT > 0.0))
            throw std::domain_error("quadrature_oracle: wT must be > 0");
        const detail::Integrand f{phase, eps, wT};
        std::complex<double> acc(0.0, 0.0);
        const auto bounds = detail::segment_bounds(phase, eps, wT);
        for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
            const double a = bounds[s], b = bounds[s + 1];
            const double fmax = detail::segment_max_frequency(f, a, b);
            int n = static_cast<int>(std::ceil(40.0 * (b - a) * fmax / two_pi));
            n = std::max(n, 16);
            if (n % 2 == 1) ++n;
            const double h = (b - a) / n;
            std::complex<double> sum = f(a) + f(b);
            for (int k = 1; k < n; ++k)
                sum += (k % 2 == 1 ? 4.0 : 2.0) * f(a + k * h);
            acc += sum * (h / 3.0);
        }
        out.values[idx] = acc + plateau_tails(phase, eps, wT);
    }
    out.omega_T = std::move(omega_T);
    return out;
}

} // namespace feshpulse
