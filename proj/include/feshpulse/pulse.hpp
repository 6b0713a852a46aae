#pragma once

// Unit-height pulse shapes P(t), their integrated phase functions phi(t),
// compositions into pulse sequences, and the dimensionless drive record.
// Time is measured in units of the pulse duration T throughout.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "feshpulse/constants.hpp"
#include "feshpulse/errors.hpp"
#include "feshpulse/specfun.hpp"

namespace feshpulse {

enum class PulseKind { square, gaussian, trapezoid, raised_cosine, tabulated };

inline const char* to_string(PulseKind k) {
    switch (k) {
        case PulseKind::square: return "square";
        case PulseKind::gaussian: return "gaussian";
        case PulseKind::trapezoid: return "trapezoid";
        case PulseKind::raised_cosine: return "raised_cosine";
        case PulseKind::tabulated: return "tabulated";
    }
    return "?";
}

// A single pulse shape, immutable after construction. All built-in shapes
// are symmetric about t = 0 with the canonical antisymmetric phase
// phi(t) = int_0^t P. The gaussian uses the erf-phase normalization
// phi = erf(t), P = (2/sqrt(pi)) e^{-t^2}; the other shapes have unit height.
class PulseShape {
public:
    static PulseShape square() { return PulseShape(PulseKind::square); }
    static PulseShape gaussian() { return PulseShape(PulseKind::gaussian); }

    // Linear edges of width s centered on |t| = 1/2; area 1 for every s.
    static PulseShape trapezoid(double edge_fraction) {
        if (!(edge_fraction > 0.0) || edge_fraction > 0.5)
            throw config_error("trapezoid: edge_fraction must lie in (0, 0.5]");
        PulseShape p(PulseKind::trapezoid);
        p.edge_ = edge_fraction;
        return p;
    }

    static PulseShape raised_cosine() { return PulseShape(PulseKind::raised_cosine); }

    static PulseShape tabulated(std::vector<double> t, std::vector<double> p) {
        if (t.size() != p.size() || t.size() < 4)
            throw config_error("tabulated pulse needs at least 4 samples");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1]))
                throw config_error("tabulated pulse abscissas must be strictly increasing");
        PulseShape s(PulseKind::tabulated);
        s.tab_t_ = std::move(t);
        s.tab_p_ = std::move(p);
        for (double& v : s.tab_p_) v = std::max(v, 0.0); // model requires P >= 0
        s.build_tabulated();
        return s;
    }

    // Two-column CSV with header "t,P".
    static PulseShape tabulated_from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open tabulated pulse file: " + path);
        std::string line;
        if (!std::getline(in, line)) throw config_error("empty pulse file: " + path);
        auto strip = [](std::string s) {
            s.erase(std::remove_if(s.begin(), s.end(),
                                   [](unsigned char c) { return std::isspace(c); }),
                    s.end());
            return s;
        };
        if (strip(line) != "t,P")
            throw config_error("pulse file must start with header 't,P': " + path);
        std::vector<double> ts, ps;
        while (std::getline(in, line)) {
            if (strip(line).empty()) continue;
            std::istringstream row(line);
            std::string a, b;
            if (!std::getline(row, a, ',') || !std::getline(row, b, ','))
                throw config_error("malformed pulse row: " + line);
            ts.push_back(std::stod(a));
            ps.push_back(std::stod(b));
        }
        return tabulated(std::move(ts), std::move(ps));
    }

    PulseKind kind() const { return kind_; }
    double edge_fraction() const { return edge_; }

    // P(t)
    double value(double t) const {
        switch (kind_) {
            case PulseKind::square:
                return (std::fabs(t) <= 0.5) ? 1.0 : 0.0;
            case PulseKind::gaussian:
                return two_over_sqrt_pi * std::exp(-t * t);
            case PulseKind::trapezoid: {
                const double a = 0.5 * (1.0 - edge_), b = 0.5 * (1.0 + edge_);
                const double u = std::fabs(t);
                if (u <= a) return 1.0;
                if (u >= b) return 0.0;
                return (b - u) / edge_;
            }
            case PulseKind::raised_cosine:
                return (std::fabs(t) <= 0.5) ? 0.5 * (1.0 + std::cos(two_pi * t)) : 0.0;
            case PulseKind::tabulated:
                return tab_value(t);
        }
        return 0.0;
    }

    // phi(t) = int_0^t P; antisymmetric for symmetric shapes.
    double phase(double t) const {
        switch (kind_) {
            case PulseKind::square:
                return std::clamp(t, -0.5, 0.5);
            case PulseKind::gaussian:
                return std::erf(t);
            case PulseKind::trapezoid: {
                const double a = 0.5 * (1.0 - edge_), b = 0.5 * (1.0 + edge_);
                const double u = std::fabs(t);
                const double sgn = (t < 0.0) ? -1.0 : 1.0;
                if (u <= a) return t;
                if (u >= b) return sgn * 0.5;
                const double ramp = (b * (u - a) - 0.5 * (u * u - a * a)) / edge_;
                return sgn * (a + ramp);
            }
            case PulseKind::raised_cosine: {
                if (t <= -0.5) return -0.25;
                if (t >= 0.5) return 0.25;
                return 0.5 * t + std::sin(two_pi * t) / (2.0 * two_pi);
            }
            case PulseKind::tabulated:
                return tab_phase(t);
        }
        return 0.0;
    }

    // dP/dt; infinity at jump edges of the square.
    double slope(double t) const {
        switch (kind_) {
            case PulseKind::square:
                return (std::fabs(std::fabs(t) - 0.5) < 1e-300)
                           ? std::numeric_limits<double>::infinity()
                           : 0.0;
            case PulseKind::gaussian:
                return -2.0 * t * two_over_sqrt_pi * std::exp(-t * t);
            case PulseKind::trapezoid: {
                const double a = 0.5 * (1.0 - edge_), b = 0.5 * (1.0 + edge_);
                const double u = std::fabs(t);
                if (u <= a || u >= b) return 0.0;
                return (t > 0.0 ? -1.0 : 1.0) / edge_;
            }
            case PulseKind::raised_cosine:
                return (std::fabs(t) < 0.5) ? -pi * std::sin(two_pi * t) : 0.0;
            case PulseKind::tabulated:
                return tab_slope(t);
        }
        return 0.0;
    }

    double area() const {
        switch (kind_) {
            case PulseKind::square: return 1.0;
            case PulseKind::gaussian: return 2.0;
            case PulseKind::trapezoid: return 1.0;
            case PulseKind::raised_cosine: return 0.5;
            case PulseKind::tabulated: return tab_area_;
        }
        return 0.0;
    }

    double height() const {
        if (kind_ == PulseKind::gaussian) return two_over_sqrt_pi;
        if (kind_ == PulseKind::tabulated) return tab_height_;
        return 1.0;
    }

    double max_abs_slope() const {
        switch (kind_) {
            case PulseKind::square: return std::numeric_limits<double>::infinity();
            case PulseKind::gaussian:
                // extremum of |P'| at t = 1/sqrt(2)
                return 2.0 * std::sqrt(0.5) * two_over_sqrt_pi * std::exp(-0.5);
            case PulseKind::trapezoid: return 1.0 / edge_;
            case PulseKind::raised_cosine: return pi;
            case PulseKind::tabulated: return tab_max_slope_;
        }
        return 0.0;
    }

    double support_halfwidth() const {
        switch (kind_) {
            case PulseKind::square: return 0.5;
            case PulseKind::gaussian: return std::numeric_limits<double>::infinity();
            case PulseKind::trapezoid: return 0.5 * (1.0 + edge_);
            case PulseKind::raised_cosine: return 0.5;
            case PulseKind::tabulated:
                return std::max(std::fabs(tab_t_.front()), std::fabs(tab_t_.back()));
        }
        return 0.0;
    }

    // Smallest t beyond which |phi(t) -/+ area/2| < 1e-14; the spectrum
    // integrals cut their core window here.
    double plateau_cut() const {
        if (kind_ != PulseKind::gaussian) return support_halfwidth();
        // 1 - erf(t) < 1e-14  =>  t ~ 5.45
        double lo = 4.0, hi = 7.0;
        for (int i = 0; i < 60; ++i) {
            double mid = 0.5 * (lo + hi);
            (1.0 - std::erf(mid) < 1e-14 ? hi : lo) = mid;
        }
        return hi;
    }

    // Kink locations of P (for quadrature subdivision).
    std::vector<double> breakpoints() const {
        switch (kind_) {
            case PulseKind::square: return {-0.5, 0.5};
            case PulseKind::gaussian: return {};
            case PulseKind::trapezoid: {
                const double a = 0.5 * (1.0 - edge_), b = 0.5 * (1.0 + edge_);
                return {-b, -a, a, b};
            }
            case PulseKind::raised_cosine: return {-0.5, 0.5};
            case PulseKind::tabulated: return tab_t_;
        }
        return {};
    }

    bool symmetric() const {
        if (kind_ != PulseKind::tabulated) return true;
        const double hw = support_halfwidth();
        for (int i = 0; i <= 32; ++i) {
            const double t = hw * i / 32.0;
            if (std::fabs(value(t) - value(-t)) > 1e-9 * std::max(1.0, height()))
                return false;
        }
        return true;
    }

private:
    explicit PulseShape(PulseKind k) : kind_(k) {}

    void build_tabulated() {
        const std::size_t n = tab_t_.size();
        tab_cum_.assign(n, 0.0);
        tab_height_ = 0.0;
        tab_max_slope_ = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            const double dt = tab_t_[i] - tab_t_[i - 1];
            tab_cum_[i] = tab_cum_[i - 1] + 0.5 * (tab_p_[i] + tab_p_[i - 1]) * dt;
            tab_max_slope_ = std::max(tab_max_slope_,
                                      std::fabs(tab_p_[i] - tab_p_[i - 1]) / dt);
        }
        for (double v : tab_p_) tab_height_ = std::max(tab_height_, v);
        tab_area_ = tab_cum_.back();
    }

    std::size_t tab_cell(double t) const {
        auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - tab_t_.begin());
        if (i == 0) i = 1;
        if (i >= tab_t_.size()) i = tab_t_.size() - 1;
        return i;
    }

    double tab_value(double t) const {
        if (t <= tab_t_.front() || t >= tab_t_.back()) return 0.0;
        const std::size_t i = tab_cell(t);
        const double w = (t - tab_t_[i - 1]) / (tab_t_[i] - tab_t_[i - 1]);
        return tab_p_[i - 1] + w * (tab_p_[i] - tab_p_[i - 1]);
    }

    double tab_slope(double t) const {
        if (t <= tab_t_.front() || t >= tab_t_.back()) return 0.0;
        const std::size_t i = tab_cell(t);
        return (tab_p_[i] - tab_p_[i - 1]) / (tab_t_[i] - tab_t_[i - 1]);
    }

    // Cumulative trapezoid, shifted so phi(+inf) + phi(-inf) = 0.
    double tab_phase(double t) const {
        if (t <= tab_t_.front()) return -0.5 * tab_area_;
        if (t >= tab_t_.back()) return 0.5 * tab_area_;
        const std::size_t i = tab_cell(t);
        const double dt = t - tab_t_[i - 1];
        const double pl = tab_p_[i - 1];
        const double sl = (tab_p_[i] - tab_p_[i - 1]) / (tab_t_[i] - tab_t_[i - 1]);
        return tab_cum_[i - 1] + pl * dt + 0.5 * sl * dt * dt - 0.5 * tab_area_;
    }

    PulseKind kind_;
    double edge_ = 0.0;
    std::vector<double> tab_t_, tab_p_, tab_cum_;
    double tab_area_ = 0.0, tab_height_ = 0.0, tab_max_slope_ = 0.0;
};

// (eps, T, E0, dE): pulse height/width in reduced units plus base offset.
// eps = dE * T / hbar.
struct DimensionlessDrive {
    double epsilon = 0.0;      // dimensionless energy
    double duration = 0.0;     // T [s]
    double base_energy = 0.0;  // E0 = E_res(B0) + U_cl [J]
    double pulse_energy = 0.0; // dE [J]

    static DimensionlessDrive from_epsilon(double eps, double T, double E0 = 0.0) {
        check(eps, T);
        return {eps, T, E0, eps * hbar / T};
    }
    static DimensionlessDrive from_pulse_energy(double dE, double T, double E0 = 0.0) {
        DimensionlessDrive d{dE * T / hbar, T, E0, dE};
        check(d.epsilon, T);
        return d;
    }
    static DimensionlessDrive from_field_step(double dB, double mu_res, double T,
                                              double E0 = 0.0) {
        return from_pulse_energy(mu_res * dB, T, E0);
    }

private:
    static void check(double eps, double T) {
        if (!std::isfinite(eps) || eps < 0.0)
            throw config_error("drive: epsilon must be finite and >= 0");
        if (!(T > 0.0) || !std::isfinite(T))
            throw config_error("drive: duration must be positive");
    }
};

// One element of a pulse sequence. The first element is centered at its
// delay_before; every later delay_before is the gap between supports.
struct SequenceElement {
    PulseShape shape;
    double height_ratio = 1.0;
    double duration_ratio = 1.0;
    double delay_before = 0.0;
};

struct PulseSequence {
    std::vector<SequenceElement> elements;
};

struct StationaryPointResult {
    std::optional<double> t;  // positive root of P(t) = nu, if any
    bool at_edge = false;     // sweep happens at a jump edge (square-type)
    bool multiple = false;    // P - nu has several positive roots
};

namespace detail {
// effective halfwidth used for sequence placement (gaussian support is infinite)
inline double placement_halfwidth(const PulseShape& s) {
    const double hw = s.support_halfwidth();
    return std::isfinite(hw) ? hw : s.plateau_cut();
}
} // namespace detail

// Phase function of a pulse or pulse sequence: phi(t) with
// phi(+-inf) = +-ascent/2, slope P_total(t), and the bookkeeping the
// spectrum integrator needs (core window, breakpoints, stationary points).
class PhaseFunction {
public:
    struct Element {
        PulseShape shape;
        double height, duration, center;
    };

    explicit PhaseFunction(PulseShape shape) {
        elems_.push_back({std::move(shape), 1.0, 1.0, 0.0});
        finish();
    }

    static PhaseFunction concatenate(const PulseSequence& seq) {
        if (seq.elements.empty())
            throw config_error("pulse sequence must contain at least one element");
        PhaseFunction p;
        double prev_end = 0.0;
        bool first = true;
        for (const auto& e : seq.elements) {
            if (e.delay_before < 0.0)
                throw config_error("pulse sequence delays must be >= 0");
            if (!(e.height_ratio > 0.0) || !(e.duration_ratio > 0.0))
                throw config_error("pulse sequence ratios must be positive");
            const double hw = detail::placement_halfwidth(e.shape) * e.duration_ratio;
            double center;
            if (first) {
                center = e.delay_before;
                first = false;
            } else {
                center = prev_end + e.delay_before + hw;
            }
            if (!p.elems_.empty() && center - hw < prev_end - 1e-12)
                throw config_error("pulse sequence supports overlap");
            p.elems_.push_back({e.shape, e.height_ratio, e.duration_ratio, center});
            prev_end = center + hw;
        }
        p.finish();
        return p;
    }

    double phase(double t) const {
        double acc = -0.5 * ascent_;
        for (const auto& e : elems_) {
            const double u = (t - e.center) / e.duration;
            acc += e.height * e.duration * (e.shape.phase(u) + 0.5 * e.shape.area());
        }
        return acc;
    }

    double pulse(double t) const {
        double acc = 0.0;
        for (const auto& e : elems_)
            acc += e.height * e.shape.value((t - e.center) / e.duration);
        return acc;
    }

    double slope(double t) const {
        double acc = 0.0;
        for (const auto& e : elems_)
            acc += e.height / e.duration * e.shape.slope((t - e.center) / e.duration);
        return acc;
    }

    double ascent() const { return ascent_; }
    double phi_infinity() const { return 0.5 * ascent_; }

    double core_lo() const { return core_lo_; }
    double core_hi() const { return core_hi_; }

    double max_height() const {
        double m = 0.0;
        for (const auto& e : elems_) m = std::max(m, e.height * e.shape.height());
        return m;
    }

    double max_abs_slope() const {
        double m = 0.0;
        for (const auto& e : elems_)
            m = std::max(m, e.height / e.duration * e.shape.max_abs_slope());
        return m;
    }

    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (const auto& e : elems_)
            for (double x : e.shape.breakpoints())
                b.push_back(e.center + x * e.duration);
        std::sort(b.begin(), b.end());
        return b;
    }

    bool symmetric() const {
        return elems_.size() == 1 && elems_[0].center == 0.0 &&
               elems_[0].shape.symmetric();
    }

    bool has_jump_edges() const {
        for (const auto& e : elems_)
            if (e.shape.kind() == PulseKind::square) return true;
        return false;
    }

    const std::vector<Element>& elements() const { return elems_; }

private:
    PhaseFunction() = default;

    void finish() {
        ascent_ = 0.0;
        core_lo_ = std::numeric_limits<double>::infinity();
        core_hi_ = -core_lo_;
        for (const auto& e : elems_) {
            ascent_ += e.height * e.duration * e.shape.area();
            const double cut = e.shape.plateau_cut() * e.duration;
            core_lo_ = std::min(core_lo_, e.center - cut);
            core_hi_ = std::max(core_hi_, e.center + cut);
        }
    }

    std::vector<Element> elems_;
    double ascent_ = 0.0, core_lo_ = 0.0, core_hi_ = 0.0;
};

// phi(t) of a phase function; thin wrapper naming the operation.
inline double phase_at(const PhaseFunction& p, double t) {
    if (!std::isfinite(t)) throw std::domain_error("phase_at: non-finite time");
    return p.phase(t);
}

// Positive root of P(t) = nu, the instant at which the pulse sweeps over
// the reduced frequency nu = omega T / eps. No real root exists above the
// max slope of phi; jump-edged pulses sweep instantaneously (at_edge).
inline StationaryPointResult stationary_point(const PhaseFunction& p, double nu) {
    if (!(nu > 0.0)) throw std::domain_error("stationary_point: nu must be > 0");
    StationaryPointResult res;
    if (nu > p.max_height()) {
        res.at_edge = false;
        return res; // no real stationary point
    }
    if (p.has_jump_edges() && p.elements().size() == 1) {
        res.at_edge = true;
        return res;
    }
    // scan the positive half of the core for descending crossings of nu
    const double hi = p.core_hi();
    const int n = 2048;
    std::vector<double> roots;
    double prev_t = 0.0, prev_v = p.pulse(0.0) - nu;
    for (int i = 1; i <= n; ++i) {
        const double t = hi * i / n;
        const double v = p.pulse(t) - nu;
        if ((prev_v > 0.0 && v <= 0.0) || (prev_v <= 0.0 && v > 0.0)) {
            double a = prev_t, b = t;
            for (int k = 0; k < 80; ++k) {
                const double m = 0.5 * (a + b);
                const double fm = p.pulse(m) - nu;
                if ((p.pulse(a) - nu) * fm <= 0.0) b = m; else a = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_t = t;
        prev_v = v;
    }
    if (roots.empty()) {
        // nu equals the max height: treat the peak as the (degenerate) root
        if (std::fabs(nu - p.max_height()) < 1e-12 * p.max_height()) {
            res.t = 0.0;
            return res;
        }
        return res;
    }
    res.t = roots.front();
    res.multiple = roots.size() > 1;
    return res;
}

// Piecewise phase function of a pulse sequence.
inline PhaseFunction concatenate(const PulseSequence& seq) {
    return PhaseFunction::concatenate(seq);
}

} // namespace feshpulse
