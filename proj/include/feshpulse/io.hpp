#pragma once

// CSV exports with JSON sidecars, and the JSON run configuration.
// CSV numbers are printed with %.17g so identical runs produce
// byte-identical files.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "feshpulse/dissstate.hpp"
#include "feshpulse/dynamics.hpp"
#include "feshpulse/optimize.hpp"
#include "feshpulse/pulse.hpp"
#include "feshpulse/spectrum.hpp"

namespace feshpulse {

inline constexpr const char* version_string = "0.1.0";

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

struct Sidecar {
    std::string config_hash;
    std::string method;
    double tolerance_achieved = 0.0;
    std::optional<DimensionlessDrive> drive;
    nlohmann::json extra;
};

inline void write_sidecar(const std::filesystem::path& csv_path, const Sidecar& sc) {
    nlohmann::json j;
    j["version"] = version_string;
    j["config_hash"] = sc.config_hash;
    j["method"] = sc.method;
    j["tolerance_achieved"] = sc.tolerance_achieved;
    j["constants"] = {{"hbar", hbar}, {"mu_B", bohr_magneton}};
    if (sc.drive) {
        j["drive"] = {{"epsilon", sc.drive->epsilon},
                      {"T", sc.drive->duration},
                      {"E0", sc.drive->base_energy},
                      {"dE", sc.drive->pulse_energy}};
    }
    if (!sc.extra.is_null()) j["extra"] = sc.extra;
    std::ofstream out(csv_path.string() + ".meta.json");
    out << j.dump(2) << "\n";
}

inline void write_spectrum_csv(const std::filesystem::path& path, const SpectrumGrid& g,
                               const Sidecar& sc) {
    std::ofstream out(path);
    out << "omega_T,re,im,abs\n";
    for (std::size_t i = 0; i < g.size(); ++i)
        out << fmt(g.omega_T[i]) << ',' << fmt(g.values[i].real()) << ','
            << fmt(g.values[i].imag()) << ',' << fmt(std::abs(g.values[i])) << "\n";
    Sidecar s = sc;
    s.method = to_string(g.method);
    s.tolerance_achieved = g.achieved_tol;
    s.drive = g.drive;
    write_sidecar(path, s);
}

inline void write_state_csv(const std::filesystem::path& path,
                            const DissociationState& st, const Sidecar& sc) {
    std::ofstream out(path);
    out << "p_cm,p_rel,re,im,prob_density\n";
    for (std::size_t j = 0; j < st.p_cm.size(); ++j)
        for (std::size_t i = 0; i < st.p_rel.size(); ++i) {
            const auto a = st.at(j, i);
            out << fmt(st.p_cm[j]) << ',' << fmt(st.p_rel[i]) << ',' << fmt(a.real())
                << ',' << fmt(a.imag()) << ',' << fmt(std::norm(a)) << "\n";
        }
    write_sidecar(path, sc);
}

inline void write_decay_csv(const std::filesystem::path& path, const DecayProfile& d,
                            const Sidecar& sc) {
    std::ofstream out(path);
    out << "t,gamma,absD\n";
    for (std::size_t i = 0; i < d.times.size(); ++i)
        out << fmt(d.times[i]) << ',' << fmt(d.gamma[i]) << ',' << fmt(d.d[i]) << "\n";
    write_sidecar(path, sc);
}

inline void write_energy_csv(const std::filesystem::path& path,
                             const EnergyDistribution& n, const Sidecar& sc) {
    std::ofstream out(path);
    out << "E,n\n";
    for (std::size_t i = 0; i < n.energy.size(); ++i)
        out << fmt(n.energy[i]) << ',' << fmt(n.n[i]) << "\n";
    write_sidecar(path, sc);
}

inline void write_trace_csv(const std::filesystem::path& path, const OptimizeResult& r,
                            const std::vector<std::string>& param_names,
                            const Sidecar& sc) {
    std::ofstream out(path);
    out << "iter";
    for (const auto& n : param_names) out << ',' << n;
    out << ",score\n";
    for (const auto& e : r.trace) {
        out << e.eval;
        for (double p : e.params) out << ',' << fmt(p);
        out << ',' << fmt(e.score) << "\n";
    }
    write_sidecar(path, sc);
}

inline void write_compare_csv(const std::filesystem::path& path, const SpectrumGrid& a,
                              const SpectrumGrid& b, const Sidecar& sc) {
    if (a.size() != b.size())
        throw config_error("compare: grids must have equal size");
    std::ofstream out(path);
    out << "omega_T,re_a,im_a,re_b,im_b,residual\n";
    for (std::size_t i = 0; i < a.size(); ++i)
        out << fmt(a.omega_T[i]) << ',' << fmt(a.values[i].real()) << ','
            << fmt(a.values[i].imag()) << ',' << fmt(b.values[i].real()) << ','
            << fmt(b.values[i].imag()) << ',' << fmt(std::abs(a.values[i] - b.values[i]))
            << "\n";
    write_sidecar(path, sc);
}

struct GridSpec {
    double min = 0.0, max = 0.0;
    std::size_t points = 0;
};

struct OptimizeSpec {
    std::string family = "trapezoid";
    double lo = 0.01, hi = 0.45;
    ObjectiveKind objective = ObjectiveKind::ripple_energy;
    int max_evals = 500;
};

struct RunConfig {
    PhysicalSetup setup;
    DimensionlessDrive drive;
    PhaseFunction phase;
    std::string pulse_description;
    bool pulse_is_square = false;
    bool pulse_is_gaussian = false;
    bool pulse_symmetric_smooth = false;
    std::string method = "auto"; // numeric|airy|stationary|square|auto
    bool delta_approx = true;
    bool bound_states_off_tuned = false; // user-asserted, see docs
    std::optional<GridSpec> omega_grid;
    std::optional<GridSpec> time_grid;
    std::size_t p_rel_points = 4096;
    std::size_t p_cm_points = 41;
    std::optional<double> t_m;
    std::optional<OptimizeSpec> optimize;
    std::string out_dir = "out";
    std::string config_hash;
};

namespace detail {

inline double need_num(const nlohmann::json& j, const char* section, const char* key) {
    if (!j.contains(key))
        throw config_error(std::string("config: missing field ") + section + "." + key);
    if (!j[key].is_number())
        throw config_error(std::string("config: field ") + section + "." + key +
                           " must be a number");
    return j[key].get<double>();
}

inline PulseShape parse_shape(const nlohmann::json& p,
                              const std::filesystem::path& base_dir) {
    const std::string kind = p.value("kind", "");
    if (kind == "square") return PulseShape::square();
    if (kind == "gaussian") return PulseShape::gaussian();
    if (kind == "trapezoid")
        return PulseShape::trapezoid(need_num(p, "pulse", "edge_fraction"));
    if (kind == "raised_cosine") return PulseShape::raised_cosine();
    if (kind == "tabulated") {
        if (!p.contains("path"))
            throw config_error("config: tabulated pulse needs pulse.path");
        std::filesystem::path fp = p["path"].get<std::string>();
        if (fp.is_relative()) fp = base_dir / fp;
        return PulseShape::tabulated_from_csv(fp.string());
    }
    throw config_error("config: unknown pulse.kind '" + kind + "'");
}

} // namespace detail

inline RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: JSON syntax error: ") + e.what());
    }
    if (!j.contains("setup")) throw config_error("config: missing section 'setup'");
    const auto& js = j["setup"];
    PhysicalSetup setup;
    setup.a_bg = detail::need_num(js, "setup", "a_bg");
    setup.mu_res = detail::need_num(js, "setup", "mu_res");
    setup.dB_res = detail::need_num(js, "setup", "dB_res");
    setup.omega_G = detail::need_num(js, "setup", "omega_G");
    setup.omega_T = detail::need_num(js, "setup", "omega_T");
    setup.U0_G = detail::need_num(js, "setup", "U0_G");
    setup.U0_T = detail::need_num(js, "setup", "U0_T");
    setup.mass = detail::need_num(js, "setup", "m");
    setup.B0 = js.value("B0", 0.0);
    setup.B_res = js.value("B_res", 0.0);
    setup.validate();

    if (!j.contains("drive")) throw config_error("config: missing section 'drive'");
    const auto& jd = j["drive"];
    const double T = detail::need_num(jd, "drive", "T");
    if (!(T > 0.0)) throw config_error("config: drive.T must be positive");
    double E0;
    if (jd.contains("E0"))
        E0 = jd["E0"].get<double>();
    else
        E0 = setup.e_res(setup.B0) + setup.u_cl();
    const bool has_eps = jd.contains("epsilon");
    const bool has_db = jd.contains("dB");
    if (!has_eps && !has_db)
        throw config_error("config: drive needs exactly one of epsilon or dB");
    DimensionlessDrive drive =
        has_db ? DimensionlessDrive::from_field_step(jd["dB"].get<double>(),
                                                     setup.mu_res, T, E0)
               : DimensionlessDrive::from_epsilon(jd["epsilon"].get<double>(), T, E0);
    if (has_eps && has_db) {
        const double eps_direct = jd["epsilon"].get<double>();
        if (std::fabs(eps_direct - drive.epsilon) > 1e-9 * std::fabs(drive.epsilon))
            throw config_error(
                "config: drive.epsilon conflicts with drive.dB (relative mismatch "
                "> 1e-9)");
        drive = DimensionlessDrive::from_epsilon(eps_direct, T, E0);
    }

    if (!j.contains("pulse")) throw config_error("config: missing section 'pulse'");
    const auto base_dir = path.parent_path();
    RunConfig rc{setup, drive, PhaseFunction(PulseShape::square())};
    const auto& jp = j["pulse"];
    if (jp.contains("sequence")) {
        PulseSequence seq;
        for (const auto& e : jp["sequence"]) {
            seq.elements.push_back({detail::parse_shape(e, base_dir),
                                    e.value("height", 1.0), e.value("duration", 1.0),
                                    e.value("delay", 0.0)});
        }
        rc.phase = concatenate(seq);
        rc.pulse_description = "sequence[" + std::to_string(seq.elements.size()) + "]";
    } else {
        const PulseShape shape = detail::parse_shape(jp, base_dir);
        rc.pulse_is_square = shape.kind() == PulseKind::square;
        rc.pulse_is_gaussian = shape.kind() == PulseKind::gaussian;
        rc.pulse_symmetric_smooth =
            !rc.pulse_is_square && shape.symmetric();
        rc.pulse_description = to_string(shape.kind());
        rc.phase = PhaseFunction(shape);
    }

    if (j.contains("grids")) {
        const auto& jg = j["grids"];
        if (jg.contains("omega")) {
            GridSpec g;
            g.max = detail::need_num(jg["omega"], "grids.omega", "max");
            g.min = jg["omega"].value("min", 0.0);
            g.points = jg["omega"].value("points", 4096u);
            if (!(g.max > g.min) || g.min < 0.0 || g.points < 2)
                throw config_error("config: grids.omega must be positive and increasing");
            rc.omega_grid = g;
        }
        if (jg.contains("time")) {
            GridSpec g;
            g.min = detail::need_num(jg["time"], "grids.time", "min");
            g.max = detail::need_num(jg["time"], "grids.time", "max");
            g.points = jg["time"].value("points", 2001u);
            if (!(g.max > g.min) || g.points < 2)
                throw config_error("config: grids.time must be increasing");
            rc.time_grid = g;
        }
        rc.p_rel_points = jg.value("p_rel_points", rc.p_rel_points);
        rc.p_cm_points = jg.value("p_cm_points", rc.p_cm_points);
    }
    rc.method = j.value("method", "auto");
    const bool method_known =
        rc.method == "numeric" || rc.method == "airy" || rc.method == "stationary" ||
        rc.method == "square" || rc.method == "auto";
    if (!method_known)
        throw config_error("config: unknown method '" + rc.method + "'");
    rc.delta_approx = j.value("delta_approx", true);
    rc.bound_states_off_tuned = j.value("bound_states_off_tuned", false);
    if (j.contains("t_m")) rc.t_m = j["t_m"].get<double>();
    if (j.contains("optimize")) {
        const auto& jo = j["optimize"];
        OptimizeSpec os;
        os.family = jo.value("family", "trapezoid");
        if (os.family != "trapezoid")
            throw config_error("config: only the trapezoid family is built in");
        if (jo.contains("bounds")) {
            os.lo = jo["bounds"][0].get<double>();
            os.hi = jo["bounds"][1].get<double>();
        }
        const std::string ob = jo.value("objective", "ripple_energy");
        if (ob == "ripple_energy") os.objective = ObjectiveKind::ripple_energy;
        else if (ob == "rms_width") os.objective = ObjectiveKind::rms_width;
        else if (ob == "neg_peak_concentration")
            os.objective = ObjectiveKind::neg_peak_concentration;
        else throw config_error("config: unknown objective '" + ob + "'");
        os.max_evals = jo.value("max_evals", 500);
        rc.optimize = os;
    }
    if (j.contains("output")) rc.out_dir = j["output"].value("dir", rc.out_dir);
    rc.config_hash = hex64(fnv1a64(text));
    return rc;
}

} // namespace feshpulse
