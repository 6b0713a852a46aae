#pragma once

// Spectral sharpness objectives and a derivative-free search over
// parametrized pulse families for the shape minimizing momentum spread.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "feshpulse/pulse.hpp"
#include "feshpulse/spectrum.hpp"

namespace feshpulse {

struct PulseFamily {
    std::string name;
    std::function<PulseShape(const std::vector<double>&)> make;
    std::vector<std::pair<double, double>> bounds; // per-parameter [lo, hi]
    std::vector<std::string> param_names;

    // square <-> smooth interpolation via the trapezoid edge fraction
    static PulseFamily trapezoid_family(double s_lo = 0.01, double s_hi = 0.45) {
        PulseFamily f;
        f.name = "trapezoid";
        f.make = [](const std::vector<double>& p) { return PulseShape::trapezoid(p[0]); };
        f.bounds = {{s_lo, s_hi}};
        f.param_names = {"s"};
        return f;
    }
};

enum class ObjectiveKind { ripple_energy, rms_width, neg_peak_concentration };

inline const char* to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::ripple_energy: return "ripple_energy";
        case ObjectiveKind::rms_width: return "rms_width";
        case ObjectiveKind::neg_peak_concentration: return "neg_peak_concentration";
    }
    return "?";
}

namespace detail {

// Main-lobe bracket: outward zero-crossing search of Re(value) from the
// global density peak; where no sign change exists, the nearest local
// minimum below 1e-2 * peak serves as the bracket.
struct LobeBracket {
    std::size_t lo = 0, hi = 0, peak = 0;
    bool found = false;
};

inline LobeBracket find_main_lobe(const SpectrumGrid& g, std::size_t first,
                                  std::size_t last) {
    LobeBracket b;
    if (last <= first) return b;
    std::size_t ipk = first;
    for (std::size_t i = first; i < last; ++i)
        if (std::norm(g.values[i]) > std::norm(g.values[ipk])) ipk = i;
    const double peak = std::norm(g.values[ipk]);
    if (!(peak > 1e-200)) return b;
    b.peak = ipk;
    const double dip = 1e-2 * peak;
    bool found_lo = false, found_hi = false;
    std::size_t lo = first, hi = last - 1;
    for (std::size_t i = ipk; i-- > first;) {
        const bool zero = g.values[i].real() * g.values[i + 1].real() < 0.0;
        const bool dipmin = std::norm(g.values[i]) < dip &&
                            std::norm(g.values[i]) <= std::norm(g.values[i + 1]);
        if (zero || dipmin) { lo = i; found_lo = true; break; }
    }
    for (std::size_t i = ipk + 1; i < last; ++i) {
        const bool zero = g.values[i].real() * g.values[i - 1].real() < 0.0;
        const bool dipmin = std::norm(g.values[i]) < dip &&
                            std::norm(g.values[i]) <= std::norm(g.values[i - 1]);
        if (zero || dipmin) { hi = i; found_hi = true; break; }
    }
    b.lo = lo;
    b.hi = hi;
    b.found = found_lo && found_hi;
    return b;
}

inline double band_mass(const SpectrumGrid& g, std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
        acc += 0.5 * (std::norm(g.values[i]) + std::norm(g.values[i + 1])) *
               (g.omega_T[i + 1] - g.omega_T[i]);
    return acc;
}

} // namespace detail

struct ObjectiveOptions {
    // mass accounting starts at the physically reachable band edge
    // wT > |E0| T / hbar (E0 < 0); the principal-value wing next to the
    // excluded delta at wT = 0 would otherwise dominate every shape alike
    bool physical_band_only = true;
};

struct ObjectiveResult {
    double score = 1.0;
    bool no_main_lobe = false;
};

inline ObjectiveResult ripple_objective_on(const SpectrumGrid& g,
                                           const ObjectiveOptions& opt = {}) {
    std::size_t first = 0;
    if (opt.physical_band_only && g.drive.base_energy < 0.0) {
        const double floor = -g.drive.base_energy * g.drive.duration / hbar;
        while (first < g.size() && g.omega_T[first] < floor) ++first;
    }
    if (g.size() < first + 8) return {1.0, true};
    const auto lobe = detail::find_main_lobe(g, first, g.size());
    if (!lobe.found) return {1.0, true};
    const double total = detail::band_mass(g, first, g.size() - 1);
    if (!(total > 0.0)) return {1.0, true};
    const double inside = detail::band_mass(g, lobe.lo, lobe.hi);
    return {std::max(0.0, 1.0 - inside / total), false};
}

// Probability mass outside the main-lobe bracket, normalized by the total
// band mass. Degenerate spectra score the worst value 1.
inline double ripple_objective(const PulseShape& pulse, const DimensionlessDrive& drive,
                               const std::vector<double>& omega_T,
                               const ObjectiveOptions& opt = {}) {
    const SpectrumGrid g =
        spectrum_numeric(PhaseFunction(pulse), drive, omega_T);
    return ripple_objective_on(g, opt).score;
}

inline double objective_value(ObjectiveKind kind, const SpectrumGrid& g,
                              const ObjectiveOptions& opt = {}) {
    std::size_t first = 0;
    if (opt.physical_band_only && g.drive.base_energy < 0.0) {
        const double floor = -g.drive.base_energy * g.drive.duration / hbar;
        while (first < g.size() && g.omega_T[first] < floor) ++first;
    }
    if (g.size() < first + 8) return 1.0;
    switch (kind) {
        case ObjectiveKind::ripple_energy:
            return ripple_objective_on(g, opt).score;
        case ObjectiveKind::rms_width: {
            double mass = 0.0, m1 = 0.0, m2 = 0.0;
            for (std::size_t i = first; i < g.size(); ++i) {
                const double d = std::norm(g.values[i]);
                mass += d;
                m1 += d * g.omega_T[i];
                m2 += d * g.omega_T[i] * g.omega_T[i];
            }
            if (!(mass > 0.0)) return 1.0;
            m1 /= mass;
            m2 /= mass;
            return std::sqrt(std::max(m2 - m1 * m1, 0.0));
        }
        case ObjectiveKind::neg_peak_concentration: {
            std::size_t ipk = first;
            for (std::size_t i = first; i < g.size(); ++i)
                if (std::norm(g.values[i]) > std::norm(g.values[ipk])) ipk = i;
            if (!(std::norm(g.values[ipk]) > 1e-200)) return 1.0;
            const double c = g.omega_T[ipk];
            std::size_t lo = ipk, hi = ipk;
            while (lo > first && g.omega_T[lo - 1] > c - two_pi) --lo;
            while (hi + 1 < g.size() && g.omega_T[hi + 1] < c + two_pi) ++hi;
            const double total = detail::band_mass(g, first, g.size() - 1);
            if (!(total > 0.0)) return 1.0;
            return std::max(0.0, 1.0 - detail::band_mass(g, lo, hi) / total);
        }
    }
    return 1.0;
}

struct TraceEntry {
    int eval = 0;
    std::vector<double> params;
    double score = 0.0;
};

struct OptimizeResult {
    std::vector<double> best;
    double score = 0.0;
    std::vector<TraceEntry> trace;
    bool budget_exhausted = false;
};

struct OptimizeOptions {
    int max_evals = 500;
    double rel_improvement = 1e-4;
    ObjectiveKind objective = ObjectiveKind::ripple_energy;
    ObjectiveOptions objective_opts;
};

// Bounded Nelder-Mead with restarts at the box corners and midpoint. The
// evaluation grid stays fixed across the whole search, so the objective is
// deterministic; the result is never worse than the best seed.
inline OptimizeResult optimize_pulse(const PulseFamily& family,
                                     const DimensionlessDrive& drive,
                                     const std::vector<double>& omega_T,
                                     const OptimizeOptions& opt = {}) {
    if (family.bounds.empty()) throw config_error("optimize_pulse: empty bounds box");
    const std::size_t dim = family.bounds.size();
    OptimizeResult res;
    int evals = 0;

    auto clamp = [&](std::vector<double> x) {
        for (std::size_t i = 0; i < dim; ++i)
            x[i] = std::clamp(x[i], family.bounds[i].first, family.bounds[i].second);
        return x;
    };
    auto eval = [&](const std::vector<double>& x) {
        const SpectrumGrid g =
            spectrum_numeric(PhaseFunction(family.make(x)), drive, omega_T);
        const double s = objective_value(opt.objective, g, opt.objective_opts);
        res.trace.push_back({evals, x, s});
        ++evals;
        return s;
    };
    auto record_best = [&](const std::vector<double>& x, double s) {
        if (res.best.empty() || s < res.score) {
            res.best = x;
            res.score = s;
        }
    };

    // degenerate single-point box: zero iterations
    bool degenerate = true;
    for (const auto& b : family.bounds)
        if (b.second > b.first) degenerate = false;
    std::vector<double> lo(dim), hi(dim), mid(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        lo[i] = family.bounds[i].first;
        hi[i] = family.bounds[i].second;
        mid[i] = 0.5 * (lo[i] + hi[i]);
    }
    if (degenerate) {
        record_best(lo, eval(lo));
        return res;
    }

    for (const auto& seed : {lo, hi, mid}) {
        if (evals >= opt.max_evals) { res.budget_exhausted = true; break; }
        // simplex around the seed, 10% of the box per dimension
        std::vector<std::vector<double>> x(dim + 1, seed);
        std::vector<double> fx(dim + 1);
        for (std::size_t i = 0; i < dim; ++i) {
            double step = 0.1 * (hi[i] - lo[i]);
            if (x[i + 1][i] + step > hi[i]) step = -step;
            x[i + 1][i] += step;
            x[i + 1] = clamp(x[i + 1]);
        }
        for (std::size_t i = 0; i <= dim; ++i) fx[i] = eval(x[i]);
        int stall = 0;
        double last_best = *std::min_element(fx.begin(), fx.end());
        while (evals < opt.max_evals) {
            // order
            std::vector<std::size_t> idx(dim + 1);
            for (std::size_t i = 0; i <= dim; ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(),
                      [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
            std::vector<std::vector<double>> xs(dim + 1);
            std::vector<double> fs(dim + 1);
            for (std::size_t i = 0; i <= dim; ++i) { xs[i] = x[idx[i]]; fs[i] = fx[idx[i]]; }
            x = xs;
            fx = fs;
            record_best(x[0], fx[0]);

            double spread = 0.0;
            for (std::size_t i = 0; i < dim; ++i)
                spread = std::max(spread, std::fabs(x[dim][i] - x[0][i]) /
                                              std::max(hi[i] - lo[i], 1e-300));
            if (fx[0] < last_best * (1.0 - opt.rel_improvement))
                { last_best = fx[0]; stall = 0; }
            else if (++stall > 2 * static_cast<int>(dim) + 3)
                break;
            if (spread < 1e-6) break;

            std::vector<double> c(dim, 0.0);
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t j = 0; j < dim; ++j) c[j] += x[i][j];
            }
            for (double& v : c) v /= static_cast<double>(dim);
            auto combine = [&](double t) {
                std::vector<double> p(dim);
                for (std::size_t j = 0; j < dim; ++j)
                    p[j] = c[j] + t * (c[j] - x[dim][j]);
                return clamp(p);
            };
            const auto xr = combine(1.0);
            const double fr = eval(xr);
            if (fr < fx[0]) {
                const auto xe = combine(2.0);
                const double fe = eval(xe);
                if (fe < fr) { x[dim] = xe; fx[dim] = fe; }
                else { x[dim] = xr; fx[dim] = fr; }
            } else if (fr < fx[dim - 1]) {
                x[dim] = xr; fx[dim] = fr;
            } else {
                const auto xc = combine(-0.5);
                const double fc = eval(xc);
                if (fc < fx[dim]) { x[dim] = xc; fx[dim] = fc; }
                else { // shrink toward the best vertex
                    for (std::size_t i = 1; i <= dim; ++i) {
                        for (std::size_t j = 0; j < dim; ++j)
                            x[i][j] = x[0][j] + 0.5 * (x[i][j] - x[0][j]);
                        x[i] = clamp(x[i]);
                        fx[i] = eval(x[i]);
                        if (evals >= opt.max_evals) break;
                    }
                }
            }
        }
        record_best(x[0], fx[0]);
    }
    if (evals >= opt.max_evals) res.budget_exhausted = true;
    return res;
}

} // namespace feshpulse
