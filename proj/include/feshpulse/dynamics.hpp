#pragma once

// Channel-coupling dynamics: spectroscopic coupling constant, decay rate
// Gamma(t), decay profile D(t), spectrum convolution, quasi-stationary
// energy distribution n(E), and the slow-sweep validity check.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "feshpulse/constants.hpp"
#include "feshpulse/errors.hpp"
#include "feshpulse/pulse.hpp"
#include "feshpulse/spectrum.hpp"

namespace feshpulse {

// Spectroscopic and trap/guide constants. SI units throughout.
struct PhysicalSetup {
    double a_bg = 0.0;     // background scattering length [m]
    double mu_res = 0.0;   // magnetic-moment difference [J/T]
    double dB_res = 0.0;   // resonance width [T]
    double omega_G = 0.0;  // guide trap frequency [rad/s]
    double omega_T = 0.0;  // longitudinal trap frequency [rad/s]
    double U0_G = 0.0;     // guide laser depth [J]
    double U0_T = 0.0;     // trap laser depth [J]
    double mass = 0.0;     // single-atom mass [kg]
    double B0 = 0.0;       // base field [T]
    double B_res = 0.0;    // resonance field [T]

    double reduced_mass() const { return 0.5 * mass; }
    double total_mass() const { return 2.0 * mass; }

    // continuum-threshold shifts from the confining lasers
    double u_cl() const {
        return -2.0 * U0_T + 0.5 * hbar * omega_T - 2.0 * U0_G + hbar * omega_G;
    }
    double u_bg() const { return -2.0 * U0_G + 2.0 * hbar * omega_G; }

    double a_perp() const { return std::sqrt(hbar / (mass * omega_G)); }
    double sigma_p_trap() const { return std::sqrt(total_mass() * hbar * omega_T / 2.0); }

    double e_res(double B) const { return mu_res * (B - B_res); }

    // threshold of the decay rate: E_res above this lifts the resonance
    // over the longitudinal continuum
    double decay_threshold() const {
        return 2.0 * U0_T - 0.5 * hbar * omega_T + hbar * omega_G;
    }

    void validate() const {
        if (!(a_bg > 0.0) || !(mu_res > 0.0) || !(dB_res >= 0.0) ||
            !(omega_G > 0.0) || !(omega_T > 0.0) || !(mass > 0.0) ||
            !(U0_G >= 0.0) || !(U0_T >= 0.0))
            throw config_error("PhysicalSetup: fields must be positive");
    }
};

// |<phi_0^+|W|phi_res>|^2 = 4 pi hbar^2 / (m (2 pi hbar)^3) a_bg mu_res dB_res
inline double coupling_strength(const PhysicalSetup& s) {
    const double h = two_pi * hbar;
    return 4.0 * pi * hbar * hbar / (s.mass * h * h * h) * s.a_bg * s.mu_res * s.dB_res;
}

struct DecayRate {
    double value = 0.0;   // Gamma [1/s]
    bool near_pole = false; // within the threshold guard band
};

// Gamma = (2 w_G a_bg mu_res dB_res / hbar) sqrt(2 mu / (E_res - threshold))
// above threshold, 0 below. Inside a guard band of 1e-3 hbar w_G above the
// threshold the square-root pole dominates; the value is returned flagged,
// not extrapolated.
inline DecayRate decay_rate(double e_res, const PhysicalSetup& s) {
    const double arg = e_res - s.decay_threshold();
    if (arg <= 0.0) return {0.0, false};
    const double prefac = 2.0 * s.omega_G * s.a_bg * s.mu_res * s.dB_res / hbar;
    const double g = prefac * std::sqrt(2.0 * s.reduced_mass() / arg);
    return {g, arg < 1e-3 * hbar * s.omega_G};
}

struct DecayProfile {
    std::vector<double> times;   // [s]
    std::vector<double> gamma;   // [1/s]
    std::vector<double> d;       // |D(t)|, real-positive gauge
    double survival = 1.0;       // |D(t_end)|^2
    bool near_pole = false;      // some node fell in the threshold guard band
};

// D(t) = exp(-1/2 int_t0^t Gamma), Gamma from the instantaneous resonance
// energy E_res(t) = E0 + dE P(t/T) - U_cl. Throws resolution_error when
// Gamma changes by more than 20% between adjacent above-threshold nodes.
inline DecayProfile decay_profile(const PhaseFunction& pulse,
                                  const DimensionlessDrive& drive,
                                  const PhysicalSetup& setup,
                                  std::vector<double> times) {
    if (times.size() < 2) throw config_error("decay_profile: need >= 2 time nodes");
    DecayProfile out;
    out.gamma.resize(times.size());
    out.d.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double e_res = drive.base_energy +
                             drive.pulse_energy * pulse.pulse(times[i] / drive.duration) -
                             setup.u_cl();
        const DecayRate g = decay_rate(e_res, setup);
        out.gamma[i] = g.value;
        out.near_pole = out.near_pole || g.near_pole;
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double a = out.gamma[i - 1], b = out.gamma[i];
        if (a > 0.0 && b > 0.0 && std::fabs(b - a) > 0.2 * std::max(a, b))
            throw resolution_error(
                "decay_profile: Gamma varies by more than 20% between nodes near the "
                "threshold crossing; refine the time grid");
    }
    double cum = 0.0;
    out.d[0] = 1.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        cum += 0.5 * (out.gamma[i] + out.gamma[i - 1]) * (times[i] - times[i - 1]);
        out.d[i] = std::exp(-0.5 * cum);
    }
    out.survival = out.d.back() * out.d.back();
    out.times = std::move(times);
    return out;
}

// C~(w) = (1/2pi) int C0~(wbar) D~(w - wbar) dwbar on uniform, aligned
// grids; output restricted to the subgrid where the full D~ window fits
// inside the C0~ domain.
inline SpectrumGrid convolve_spectrum(const SpectrumGrid& c0, const SpectrumGrid& d) {
    if (c0.size() < 2 || d.size() < 2)
        throw config_error("convolve_spectrum: grids need >= 2 points");
    const double dw = c0.omega_T[1] - c0.omega_T[0];
    const double dw2 = d.omega_T[1] - d.omega_T[0];
    auto uniform = [](const std::vector<double>& g, double h) {
        for (std::size_t i = 1; i < g.size(); ++i)
            if (std::fabs(g[i] - g[i - 1] - h) > 1e-9 * std::fabs(h)) return false;
        return true;
    };
    if (std::fabs(dw - dw2) > 1e-9 * std::fabs(dw) || !uniform(c0.omega_T, dw) ||
        !uniform(d.omega_T, dw))
        throw config_error("convolve_spectrum: grids must be uniform with equal spacing");
    const double offset = (d.omega_T[0] - c0.omega_T[0]) / dw;
    if (std::fabs(offset - std::round(offset)) > 1e-6)
        throw config_error("convolve_spectrum: grids must lie on a common lattice");

    SpectrumGrid out;
    out.method = SpectrumMethod::convolved;
    out.drive = c0.drive;
    const double dlo = d.omega_T.front(), dhi = d.omega_T.back();
    for (std::size_t i = 0; i < c0.size(); ++i) {
        const double w = c0.omega_T[i];
        if (w - dhi < c0.omega_T.front() - 0.5 * dw ||
            w - dlo > c0.omega_T.back() + 0.5 * dw)
            continue; // kernel window leaves the covered domain
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t jj = 0; jj < c0.size(); ++jj) {
            const double u = w - c0.omega_T[jj];
            if (u < dlo - 0.5 * dw || u > dhi + 0.5 * dw) continue;
            const auto k = static_cast<std::size_t>(std::llround((u - dlo) / dw));
            if (k >= d.size()) continue;
            double wgt = (jj == 0 || jj + 1 == c0.size()) ? 0.5 : 1.0;
            acc += wgt * c0.values[jj] * d.values[k];
        }
        out.omega_T.push_back(w);
        out.values.push_back(acc * (dw / two_pi));
    }
    if (out.omega_T.empty())
        throw config_error("convolve_spectrum: no overlap-valid output points");
    return out;
}

struct EnergyDistribution {
    std::vector<double> energy; // [J]
    std::vector<double> n;      // [1/J]
    double survival = 1.0;
};

// Quasi-stationary n(E) for a monotone ramp E_res(t):
// n(E) = (Gamma(E)/Edot(E)) exp(-int_{E0}^{E} Gamma/Edot dE'), evaluated by
// a cumulative pass over the time grid (dE' = Edot dt').
inline EnergyDistribution quasi_stationary_distribution(
    const std::vector<double>& times, const std::vector<double>& e_res,
    const PhysicalSetup& setup) {
    const std::size_t n = times.size();
    if (n < 3 || e_res.size() != n)
        throw config_error("quasi_stationary_distribution: need matching grids, >= 3 nodes");
    for (std::size_t i = 1; i < n; ++i)
        if (!(e_res[i] > e_res[i - 1]))
            throw std::domain_error(
                "quasi_stationary_distribution: ramp must be strictly increasing");
    EnergyDistribution out;
    out.energy = e_res;
    out.n.resize(n);
    std::vector<double> gam(n), edot(n);
    for (std::size_t i = 0; i < n; ++i) gam[i] = decay_rate(e_res[i], setup).value;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0)
            edot[i] = (e_res[1] - e_res[0]) / (times[1] - times[0]);
        else if (i + 1 == n)
            edot[i] = (e_res[n - 1] - e_res[n - 2]) / (times[n - 1] - times[n - 2]);
        else
            edot[i] = (e_res[i + 1] - e_res[i - 1]) / (times[i + 1] - times[i - 1]);
    }
    double cum = 0.0;
    out.n[0] = gam[0] / edot[0];
    for (std::size_t i = 1; i < n; ++i) {
        cum += 0.5 * (gam[i] + gam[i - 1]) * (times[i] - times[i - 1]);
        out.n[i] = gam[i] / edot[i] * std::exp(-cum);
    }
    out.survival = std::exp(-cum);
    return out;
}

struct SweepReport {
    double max_dBdt = 0.0;  // [T/s]
    double bound = 0.0;     // hbar / (t_m^2 mu_res)
    double ratio = 0.0;
    bool pass = false;
    std::string note;
};

// Memory-time estimate t_m = m dx^2 / hbar from the bound-state width dx.
inline double memory_time(double dx, double mass) { return mass * dx * dx / hbar; }
inline double default_memory_time(double mass) {
    return memory_time(100.0 * bohr_radius, mass);
}

// Slow-sweep condition dB/dt << hbar / (t_m^2 mu_res); pass iff the ratio
// stays below 0.1. Jump-edged pulses have distributional slope and fail
// with an idealization note.
inline SweepReport check_slow_sweep(const PhaseFunction& pulse,
                                    const DimensionlessDrive& drive,
                                    const PhysicalSetup& setup, double t_m) {
    if (!(t_m > 0.0)) throw std::domain_error("check_slow_sweep: t_m must be > 0");
    SweepReport r;
    const double dB = drive.pulse_energy / setup.mu_res;
    r.bound = hbar / (t_m * t_m * setup.mu_res);
    const double slope = pulse.max_abs_slope();
    r.max_dBdt = slope * dB / drive.duration;
    r.ratio = r.max_dBdt / r.bound;
    r.pass = r.ratio < 0.1;
    if (std::isinf(slope))
        r.note = "square edges are an idealization: the slope bound is "
                 "distributional and always fails this check";
    return r;
}

} // namespace feshpulse
