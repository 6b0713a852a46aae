#pragma once

// Closed-form and asymptotic spectra: uniform Airy expansion for the
// gaussian pulse, stationary-phase formula for generic symmetric pulses,
// and the exact square-pulse spectrum.

#include <cmath>
#include <complex>
#include <limits>

#include "feshpulse/pulse.hpp"
#include "feshpulse/specfun.hpp"
#include "feshpulse/spectrum.hpp"

namespace feshpulse {

enum class AiryBranch { below, above };

// Coefficients of the uniform expansion at reduced frequency nu = wT/eps.
// gamma is imaginary on the below branch; gamma_sq stores the real square,
// so the Airy argument is eps^{2/3} * gamma_sq on both branches. a0_mod is
// the modulus of a0; its -i phase cancels against the 2*pi*i prefactor,
// leaving a real spectrum value.
struct AiryCoefficients {
    double alpha = 0.0;
    double gamma_sq = 0.0;
    double a0_mod = 0.0;
    AiryBranch branch = AiryBranch::below;
};

namespace detail {

inline constexpr double branch_threshold = two_over_sqrt_pi; // 2/sqrt(pi)
inline constexpr double transition_halfwidth = 1e-3 * two_over_sqrt_pi;

// erf(a) - nu a (below) resp. nu a - erfi(a) (above) reduce to 0/0 at the
// turning point; inside the window both are evaluated by their alpha -> 0
// series  (2/sqrt(pi)) (2a^3/3) (1 -/+ 3a^2/5 + 3a^4/14 -/+ a^6/18...).
inline double bracket_series_ratio(double a2, bool below) {
    const double s = below ? -1.0 : 1.0;
    return 1.0 + s * 0.6 * a2 + (3.0 / 14.0) * a2 * a2 +
           s * (1.0 / 18.0) * a2 * a2 * a2;
}

} // namespace detail

inline AiryCoefficients airy_coefficients(double nu) {
    if (!(nu > 0.0))
        throw std::domain_error("airy_coefficients: nu must be > 0");
    AiryCoefficients c;
    const double thr = detail::branch_threshold;
    c.branch = (nu <= thr) ? AiryBranch::below : AiryBranch::above;
    const bool below = c.branch == AiryBranch::below;
    const double l = std::log1p(nu * sqrt_pi / 2.0 - 1.0); // ln((sqrt(pi)/2) nu)
    const double a2 = below ? -l : l;
    c.alpha = std::sqrt(std::max(a2, 0.0));
    if (std::fabs(nu - thr) < detail::transition_halfwidth) {
        const double ratio = detail::bracket_series_ratio(a2, below);
        const double A = two_over_sqrt_pi * a2 * c.alpha * ratio; // 1.5 * bracket
        c.gamma_sq = (below ? -1.0 : 1.0) * std::cbrt(A * A);
        c.a0_mod = std::pow(thr, -1.0 / 3.0) * std::pow(ratio, 1.0 / 6.0) *
                   std::exp((below ? 1.0 : -1.0) * 0.5 * a2);
        return c;
    }
    const double bracket = below ? (std::erf(c.alpha) - nu * c.alpha)
                                 : (nu * c.alpha - erfi(c.alpha));
    const double A = 1.5 * bracket;
    c.gamma_sq = (below ? -1.0 : 1.0) * std::cbrt(A * A);
    c.a0_mod = std::pow(A, 1.0 / 6.0) / std::sqrt(nu * c.alpha);
    return c;
}

inline constexpr double airy_validity_floor = 20.0;

// Uniform asymptotic spectrum of the gaussian pulse,
// value = 2 pi i (a0 / eps^{1/3}) Ai(eps^{2/3} gamma^2); real after the
// -i phase of a0 is folded in. Below the validity floor the grid is still
// evaluated but carries a reliability warning.
inline SpectrumGrid spectrum_gaussian_uniform(const DimensionlessDrive& drive,
                                              std::vector<double> omega_T) {
    SpectrumGrid out;
    out.method = SpectrumMethod::airy_uniform;
    out.drive = drive;
    out.reliability_warning = drive.epsilon < airy_validity_floor;
    const double eps = drive.epsilon;
    if (!(eps > 0.0))
        throw std::domain_error("spectrum_gaussian_uniform: eps must be > 0");
    const double e13 = std::cbrt(eps);
    out.values.resize(omega_T.size());
    for (std::size_t i = 0; i < omega_T.size(); ++i) {
        const double wT = omega_T[i];
        if (!(wT > 0.0))
            throw std::domain_error("spectrum_gaussian_uniform: wT must be > 0");
        const AiryCoefficients c = airy_coefficients(wT / eps);
        const double ai = airy_ai(e13 * e13 * c.gamma_sq);
        out.values[i] = {two_pi * c.a0_mod / e13 * ai, 0.0};
    }
    out.omega_T = std::move(omega_T);
    return out;
}

// Stationary-phase value at a single frequency; throws on caustics and
// outside the sweep band.
inline double stationary_phase_value(const PhaseFunction& phase,
                                     const DimensionlessDrive& drive, double wT) {
    const double eps = drive.epsilon;
    if (!(eps > 0.0) || !(wT > 0.0))
        throw std::domain_error("stationary_phase_value: need eps > 0 and wT > 0");
    const auto sp = stationary_point(phase, wT / eps);
    if (!sp.t)
        throw std::domain_error("stationary_phase_value: no real stationary point");
    const double pp = std::fabs(phase.slope(*sp.t));
    if (pp < 1e-8)
        throw numeric_error("stationary_phase_value: |P'(t_w)| below caustic guard",
                            pp);
    const double amp = std::sqrt(8.0 * pi / (eps * pp));
    return amp * std::cos(wT * *sp.t - eps * phase.phase(*sp.t) + 0.25 * pi);
}

// Grid version: points outside validity are flagged and set to NaN.
inline SpectrumGrid spectrum_stationary_phase(const PhaseFunction& phase,
                                              const DimensionlessDrive& drive,
                                              std::vector<double> omega_T) {
    if (!phase.symmetric())
        throw config_error("spectrum_stationary_phase: pulse must be symmetric");
    if (phase.has_jump_edges())
        throw config_error(
            "spectrum_stationary_phase: jump-edged pulses sweep instantaneously; "
            "no interior stationary point exists");
    SpectrumGrid out;
    out.method = SpectrumMethod::stationary_phase;
    out.drive = drive;
    out.values.resize(omega_T.size());
    out.point_flags.assign(omega_T.size(), point_ok);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < omega_T.size(); ++i) {
        try {
            out.values[i] = {stationary_phase_value(phase, drive, omega_T[i]), 0.0};
        } catch (const numeric_error&) {
            out.values[i] = {nan, 0.0};
            out.point_flags[i] = point_near_caustic;
        } catch (const std::domain_error&) {
            out.values[i] = {nan, 0.0};
            out.point_flags[i] = point_no_stationary;
        }
    }
    out.omega_T = std::move(omega_T);
    return out;
}

// Exact square-pulse spectrum sinc((wT - eps)/2) * eps/wT for wT > 0; the
// delta term at wT = 0 is outside the grid by the E0 < 0 convention.
inline SpectrumGrid spectrum_square_closed(const DimensionlessDrive& drive,
                                           std::vector<double> omega_T) {
    SpectrumGrid out;
    out.method = SpectrumMethod::square_closed;
    out.drive = drive;
    out.values.resize(omega_T.size());
    for (std::size_t i = 0; i < omega_T.size(); ++i) {
        const double wT = omega_T[i];
        if (!(wT > 0.0))
            throw std::domain_error("spectrum_square_closed: wT must be > 0");
        out.values[i] = {sinc(0.5 * (wT - drive.epsilon)) * drive.epsilon *
                             pv_inverse(wT),
                         0.0};
    }
    out.omega_T = std::move(omega_T);
    return out;
}

} // namespace feshpulse
