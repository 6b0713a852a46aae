#pragma once

// Assembly of the asymptotic two-particle dissociation state from a
// spectrum grid: longitudinal momentum amplitude
//   Psi_z(p_cm, p_rel) = C~((U_bg + p_cm^2/2M + p_rel^2/2mu)/hbar) <p_cm|psi_T> / ||C~||,
// its norm, the dissociation probability |C_bg|^2, distribution metrics,
// and the regime validity report.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "feshpulse/dynamics.hpp"
#include "feshpulse/spectrum.hpp"

namespace feshpulse {

namespace detail {

// Local 4-point Lagrange interpolation of the complex grid values.
inline std::complex<double> interp_value(const SpectrumGrid& g, double wT) {
    const auto& x = g.omega_T;
    if (wT < x.front() || wT > x.back()) {
        throw std::range_error(
            "spectrum grid does not cover wT = " + std::to_string(wT) +
            " (grid band [" + std::to_string(x.front()) + ", " +
            std::to_string(x.back()) + "]); extend the omega grid");
    }
    auto it = std::upper_bound(x.begin(), x.end(), wT);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    std::size_t lo = (i >= 2) ? i - 2 : 0;
    if (lo + 4 > x.size()) lo = x.size() - 4;
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t a = lo; a < lo + 4; ++a) {
        double w = 1.0;
        for (std::size_t b = lo; b < lo + 4; ++b)
            if (b != a) w *= (wT - x[b]) / (x[a] - x[b]);
        acc += w * g.values[a];
    }
    return acc;
}

// reduced frequency of the energy shell (p_cm, p_rel) relative to the
// drive base energy
inline double omega_T_of(const SpectrumGrid& g, const PhysicalSetup& s, double p_cm,
                         double p_rel) {
    const double ke = p_cm * p_cm / (2.0 * s.total_mass()) +
                      p_rel * p_rel / (2.0 * s.reduced_mass());
    return (s.u_bg() + ke - g.drive.base_energy) * g.drive.duration / hbar;
}

inline double trap_weight(const PhysicalSetup& s, double p_cm) {
    const double sig = s.sigma_p_trap();
    return std::exp(-p_cm * p_cm / (2.0 * sig * sig)) / (sig * std::sqrt(two_pi));
}

// largest |p_rel| whose energy shell stays on the grid for the given p_cm
inline double p_rel_limit(const SpectrumGrid& g, const PhysicalSetup& s, double p_cm) {
    const double e_max = hbar * g.omega_T.back() / g.drive.duration +
                         g.drive.base_energy - s.u_bg() -
                         p_cm * p_cm / (2.0 * s.total_mass());
    if (e_max <= 0.0)
        throw coverage_error("spectral_norm: grid band lies below the energy shell");
    return std::sqrt(2.0 * s.reduced_mass() * e_max) * (1.0 - 1e-12);
}

} // namespace detail

struct NormOptions {
    bool delta_approx = true;   // |<p_cm|psi_T>|^2 ~ delta(p_cm)
    std::size_t n_rel = 1 << 17;
    std::size_t n_cm = 121;     // only used without the delta toggle
    double cm_halfwidth_sigmas = 6.0;
};

// ||C~||^2 by trapezoid quadrature over the momentum representation of the
// grid band; collapses to 1-D over p_rel in the delta approximation.
// Throws coverage_error when the band misses more than 1e-4 of the mass.
inline double spectral_norm_sq(const SpectrumGrid& grid, const PhysicalSetup& setup,
                               const NormOptions& opt = {}) {
    if (grid.size() < 8) throw config_error("spectral_norm: grid too small");
    // the band where |C~|^2 > 1e-6 max must be covered: check windowed ends
    double mx = 0.0;
    for (const auto& v : grid.values) mx = std::max(mx, std::norm(v));
    const std::size_t win = std::max<std::size_t>(2, grid.size() / 50);
    double end_lo = 0.0, end_hi = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
        end_lo = std::max(end_lo, std::norm(grid.values[i]));
        end_hi = std::max(end_hi, std::norm(grid.values[grid.size() - 1 - i]));
    }
    const double T = grid.drive.duration;
    const double T2 = T * T;

    auto rel_integral = [&](double p_cm) {
        const double phi = detail::p_rel_limit(grid, setup, p_cm);
        // lower representable |p_rel| for this p_cm (grid front may sit
        // above the shell bottom)
        const double e_min = hbar * grid.omega_T.front() / T + grid.drive.base_energy -
                             setup.u_bg() - p_cm * p_cm / (2.0 * setup.total_mass());
        const double plo =
            (e_min > 0.0) ? std::sqrt(2.0 * setup.reduced_mass() * e_min) * (1.0 + 1e-12)
                          : 0.0;
        const std::size_t n = opt.n_rel;
        double acc = 0.0;
        double f_lo = 0.0, f_hi = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double p = plo + (phi - plo) * static_cast<double>(i) / n;
            const double f =
                T2 * std::norm(detail::interp_value(
                         grid, detail::omega_T_of(grid, setup, p_cm, p)));
            if (i == 0) f_lo = f;
            if (i == n) f_hi = f;
            acc += (i == 0 || i == n) ? 0.5 * f : f;
        }
        acc *= (phi - plo) / n;
        // truncation estimate: uncovered low band + a lobe-scale strip at the top
        const double loss = f_lo * plo + f_hi * (phi - plo) / n * win;
        return std::pair<double, double>(2.0 * acc, 2.0 * loss);
    };

    double total = 0.0, loss = 0.0;
    if (opt.delta_approx) {
        auto [v, l] = rel_integral(0.0);
        total = v;
        loss = l;
    } else {
        const double sig = setup.sigma_p_trap();
        const double hw = opt.cm_halfwidth_sigmas * sig;
        const std::size_t m = opt.n_cm;
        for (std::size_t j = 0; j <= m; ++j) {
            const double p_cm = -hw + 2.0 * hw * static_cast<double>(j) / m;
            auto [v, l] = rel_integral(p_cm);
            const double w = detail::trap_weight(setup, p_cm) *
                             ((j == 0 || j == m) ? 0.5 : 1.0);
            total += w * v;
            loss += w * l;
        }
        total *= 2.0 * hw / m;
        loss *= 2.0 * hw / m;
    }
    if (!(total > 0.0)) throw coverage_error("spectral_norm: vanishing spectrum");
    if (loss / total > 1e-4 || end_lo > 1e-2 * mx || end_hi > 1e-2 * mx)
        throw coverage_error(
            "spectral_norm: grid band truncates more than 1e-4 of the spectrum mass; "
            "extend the omega grid");
    return total;
}

// |C_bg|^2 = w_G a_bg mu_res dB_res ||C~||^2 / (pi hbar^2)
inline double dissociation_probability(const SpectrumGrid& grid,
                                       const PhysicalSetup& setup,
                                       const NormOptions& opt = {}) {
    const double n2 = spectral_norm_sq(grid, setup, opt);
    return setup.omega_G * setup.a_bg * setup.mu_res * setup.dB_res * n2 /
           (pi * hbar * hbar);
}

struct DissociationState {
    std::vector<double> p_cm;   // singleton {0} in the delta approximation
    std::vector<double> p_rel;  // symmetric grid [kg m/s]
    std::vector<std::complex<double>> amplitude; // row-major [p_cm][p_rel]
    double norm_sq = 0.0;       // ||C~||^2
    double prob = 0.0;          // |C_bg|^2
    bool prob_warning = false;  // beyond the single-dissociation regime
    bool delta_approx = true;

    std::complex<double> at(std::size_t icm, std::size_t irel) const {
        return amplitude[icm * p_rel.size() + irel];
    }
};

// Interpolated amplitude at one momentum pair, given the precomputed norm.
inline std::complex<double> momentum_amplitude(const SpectrumGrid& grid,
                                               const PhysicalSetup& setup,
                                               double p_cm, double p_rel,
                                               double norm_sq, bool delta_approx) {
    const double T = grid.drive.duration;
    std::complex<double> v =
        T * detail::interp_value(grid, detail::omega_T_of(grid, setup, p_cm, p_rel));
    if (!delta_approx) {
        const double sig = setup.sigma_p_trap();
        v *= std::pow(two_pi * sig * sig, -0.25) *
             std::exp(-p_cm * p_cm / (4.0 * sig * sig));
    }
    return v / std::sqrt(norm_sq);
}

struct StateGridSpec {
    std::size_t n_rel = 4096;          // points across the symmetric p_rel grid
    std::size_t n_cm = 41;             // ignored in delta mode
    double cm_halfwidth_sigmas = 5.0;
    double rel_margin = 1.0 - 1e-9;    // stay inside the representable band
};

inline DissociationState assemble_state(const SpectrumGrid& grid,
                                        const PhysicalSetup& setup,
                                        bool delta_approx = true,
                                        const StateGridSpec& gs = {},
                                        const NormOptions& norm_opt_in = {}) {
    NormOptions nopt = norm_opt_in;
    nopt.delta_approx = delta_approx;
    DissociationState st;
    st.delta_approx = delta_approx;
    st.norm_sq = spectral_norm_sq(grid, setup, nopt);
    st.prob = setup.omega_G * setup.a_bg * setup.mu_res * setup.dB_res * st.norm_sq /
              (pi * hbar * hbar);
    st.prob_warning = st.prob > 0.1;

    double cm_max = 0.0;
    if (delta_approx) {
        st.p_cm = {0.0};
    } else {
        cm_max = gs.cm_halfwidth_sigmas * setup.sigma_p_trap();
        st.p_cm.resize(gs.n_cm);
        for (std::size_t j = 0; j < gs.n_cm; ++j)
            st.p_cm[j] = -cm_max + 2.0 * cm_max * static_cast<double>(j) /
                                       static_cast<double>(gs.n_cm - 1);
    }
    const double pr_max = detail::p_rel_limit(grid, setup, cm_max) * gs.rel_margin;
    st.p_rel.resize(gs.n_rel);
    for (std::size_t i = 0; i < gs.n_rel; ++i)
        st.p_rel[i] = -pr_max + 2.0 * pr_max * static_cast<double>(i) /
                                    static_cast<double>(gs.n_rel - 1);

    st.amplitude.resize(st.p_cm.size() * st.p_rel.size());
    const double wT_front = grid.omega_T.front();
    for (std::size_t j = 0; j < st.p_cm.size(); ++j)
        for (std::size_t i = 0; i < st.p_rel.size(); ++i) {
            const double wT = detail::omega_T_of(grid, setup, st.p_cm[j], st.p_rel[i]);
            st.amplitude[j * st.p_rel.size() + i] =
                (wT < wT_front) ? std::complex<double>(0.0, 0.0)
                                : momentum_amplitude(grid, setup, st.p_cm[j],
                                                     st.p_rel[i], st.norm_sq,
                                                     delta_approx);
        }
    return st;
}

struct DistributionMetrics {
    double peak_momentum = 0.0;   // p0 [kg m/s], positive branch
    double peak_density = 0.0;    // marginal density at p0 [s/(kg m)]
    std::optional<double> fwhm;   // absent when multimodal
    double rms_width = 0.0;
    double ripple_fraction = 0.0; // mass outside the main peak's brackets
    double velocity_rel = 0.0;    // p0 / mu
    double velocity_atom = 0.0;   // p0 / m
    bool multimodal = false;
    std::vector<double> modes;    // all mode locations when multimodal
};

// Metrics of the p_rel marginal on the positive branch.
inline DistributionMetrics distribution_metrics(const DissociationState& st,
                                                const PhysicalSetup& setup) {
    const std::size_t nr = st.p_rel.size();
    std::vector<double> rho(nr, 0.0);
    const double dcm =
        st.p_cm.size() > 1 ? st.p_cm[1] - st.p_cm[0] : 1.0;
    for (std::size_t i = 0; i < nr; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < st.p_cm.size(); ++j)
            acc += std::norm(st.at(j, i)) *
                   ((st.p_cm.size() > 1 && (j == 0 || j + 1 == st.p_cm.size())) ? 0.5
                                                                                : 1.0);
        rho[i] = acc * dcm;
    }
    // positive branch
    std::size_t i0 = 0;
    while (i0 < nr && st.p_rel[i0] < 0.0) ++i0;
    const std::vector<double> p(st.p_rel.begin() + i0, st.p_rel.end());
    std::vector<double> d(rho.begin() + i0, rho.end());
    const std::size_t n = p.size();
    if (n < 8) throw config_error("distribution_metrics: grid too small");

    DistributionMetrics m;
    std::size_t ipk = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > d[ipk]) ipk = i;
    m.peak_density = d[ipk];
    m.peak_momentum = p[ipk];
    if (ipk > 0 && ipk + 1 < n) { // parabolic refinement
        const double denom = d[ipk - 1] - 2.0 * d[ipk] + d[ipk + 1];
        if (denom < 0.0)
            m.peak_momentum =
                p[ipk] - 0.5 * (p[1] - p[0]) * (d[ipk + 1] - d[ipk - 1]) / denom;
    }
    m.velocity_rel = m.peak_momentum / setup.reduced_mass();
    m.velocity_atom = m.peak_momentum / setup.mass;

    // modes: interior local maxima
    std::vector<std::pair<double, double>> modes; // (density, location)
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (d[i] > d[i - 1] && d[i] >= d[i + 1] && d[i] > 1e-9 * m.peak_density)
            modes.emplace_back(d[i], p[i]);
    std::sort(modes.rbegin(), modes.rend());
    m.multimodal = modes.size() > 1 && modes[0].first < 2.0 * modes[1].first;
    if (m.multimodal)
        for (const auto& mo : modes) m.modes.push_back(mo.second);

    // moments over the positive branch
    double mass = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        mass += w * d[i];
        m1 += w * d[i] * p[i];
        m2 += w * d[i] * p[i] * p[i];
    }
    if (mass > 0.0) {
        m1 /= mass;
        m2 /= mass;
        m.rms_width = std::sqrt(std::max(m2 - m1 * m1, 0.0));
    }

    if (!m.multimodal) {
        // FWHM around the peak
        const double half = 0.5 * m.peak_density;
        double left = p.front(), right = p.back();
        for (std::size_t i = ipk; i-- > 0;)
            if (d[i] < half) {
                left = p[i] + (p[i + 1] - p[i]) * (half - d[i]) / (d[i + 1] - d[i]);
                break;
            }
        for (std::size_t i = ipk + 1; i < n; ++i)
            if (d[i] < half) {
                right = p[i - 1] +
                        (p[i] - p[i - 1]) * (d[i - 1] - half) / (d[i - 1] - d[i]);
                break;
            }
        m.fwhm = right - left;
    }

    // ripple: mass outside the main peak's bracketing dips
    const double dip = 1e-2 * m.peak_density;
    std::size_t bl = 0, br = n - 1;
    for (std::size_t i = ipk; i-- > 0;)
        if (d[i] < dip && (i == 0 || d[i] <= d[i + 1])) { bl = i; break; }
    for (std::size_t i = ipk + 1; i < n; ++i)
        if (d[i] < dip && (i + 1 == n || d[i] <= d[i - 1])) { br = i; break; }
    double inside = 0.0;
    for (std::size_t i = bl; i <= br; ++i)
        inside += ((i == bl || i == br) ? 0.5 : 1.0) * d[i];
    m.ripple_fraction = (mass > 0.0) ? std::max(0.0, 1.0 - inside / mass) : 1.0;
    return m;
}

struct RegimeCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RegimeReport {
    std::vector<RegimeCheck> checks;
    bool all_pass = true;

    void add(std::string name, bool pass, std::string detail) {
        all_pass = all_pass && pass;
        checks.push_back({std::move(name), pass, std::move(detail)});
    }
};

// Pass/fail lines for the single-mode condition, confinement-resonance
// safety, single-dissociation regime, slow-sweep bound, and the below-
// threshold base field convention.
inline RegimeReport validate_regime(const DissociationState& st,
                                    const DistributionMetrics& m,
                                    const PhysicalSetup& setup,
                                    const DimensionlessDrive& drive,
                                    const SweepReport& sweep) {
    RegimeReport r;
    const double e_kin = m.peak_momentum * m.peak_momentum / (2.0 * setup.reduced_mass());
    const double gap = hbar * setup.omega_G;
    r.add("single_mode", e_kin < gap,
          "E_kin(peak) = " + std::to_string(e_kin) + " J vs hbar*omega_G = " +
              std::to_string(gap) + " J");
    const double ar = setup.a_perp() / setup.a_bg;
    r.add("confinement", ar > 10.0,
          "a_perp/a_bg = " + std::to_string(ar) +
              (ar > 10.0 ? "" : " (confinement-induced resonance regime)"));
    r.add("single_dissociation", st.prob < 0.1,
          "|C_bg|^2 = " + std::to_string(st.prob));
    r.add("slow_sweep", sweep.pass,
          "max|dB/dt| / bound = " + std::to_string(sweep.ratio) +
              (sweep.note.empty() ? "" : "; " + sweep.note));
    r.add("base_below_threshold", drive.base_energy < 0.0,
          "E0 = " + std::to_string(drive.base_energy) +
              " J (E0 >= 0 would pull the delta term at wT = 0 into the physical band)");
    return r;
}

} // namespace feshpulse
