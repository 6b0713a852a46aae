// Command-line front end: spectrum, state, decay, optimize, validate and
// compare subcommands, all driven by a JSON config. Exit codes: 0 success,
// 2 config error, 3 numeric error, 4 validity failure under --strict.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "feshpulse/feshpulse.hpp"

namespace fp = feshpulse;
namespace fs = std::filesystem;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string method;
    bool strict = false;
    std::size_t grid_points = 0;
};

std::vector<double> omega_grid_for(const fp::RunConfig& rc, const CliOptions& cli) {
    fp::GridSpec g;
    if (rc.omega_grid) {
        g = *rc.omega_grid;
    } else {
        g.min = 0.0;
        g.max = 1.3 * rc.drive.epsilon;
        g.points = 4096;
    }
    if (cli.grid_points > 1) g.points = cli.grid_points;
    if (g.min > 0.0) return fp::uniform_grid(g.min, g.max, g.points);
    return fp::default_omega_grid(g.max, g.points);
}

std::string effective_method(const fp::RunConfig& rc, const CliOptions& cli) {
    std::string m = cli.method.empty() ? rc.method : cli.method;
    if (m != "auto") return m;
    if (rc.pulse_is_square) return "square";
    if (rc.pulse_is_gaussian) return "airy";
    if (rc.pulse_symmetric_smooth) return "stationary";
    return "numeric";
}

fp::SpectrumGrid compute_by_method(const fp::RunConfig& rc, const std::string& m,
                                   std::vector<double> grid) {
    if (m == "numeric") return fp::spectrum_numeric(rc.phase, rc.drive, std::move(grid));
    if (m == "airy") {
        if (!rc.pulse_is_gaussian)
            throw fp::config_error("method 'airy' applies to the gaussian pulse only");
        return fp::spectrum_gaussian_uniform(rc.drive, std::move(grid));
    }
    if (m == "stationary")
        return fp::spectrum_stationary_phase(rc.phase, rc.drive, std::move(grid));
    if (m == "square") {
        if (!rc.pulse_is_square)
            throw fp::config_error("method 'square' applies to the square pulse only");
        return fp::spectrum_square_closed(rc.drive, std::move(grid));
    }
    throw fp::config_error("unknown method '" + m + "'");
}

std::vector<double> time_grid_for(const fp::RunConfig& rc) {
    fp::GridSpec g;
    if (rc.time_grid) {
        g = *rc.time_grid;
    } else {
        const double hw =
            std::max(1.0, rc.phase.core_hi() - rc.phase.core_lo()) * rc.drive.duration;
        g.min = rc.phase.core_lo() * rc.drive.duration - 0.05 * hw;
        g.max = rc.phase.core_hi() * rc.drive.duration + 0.05 * hw;
        g.points = 4001;
    }
    return fp::uniform_grid(g.min, g.max, g.points);
}

fp::SweepReport sweep_report(const fp::RunConfig& rc) {
    const double t_m = rc.t_m ? *rc.t_m : fp::default_memory_time(rc.setup.mass);
    return fp::check_slow_sweep(rc.phase, rc.drive, rc.setup, t_m);
}

int run_spectrum(const fp::RunConfig& rc, const CliOptions& cli, const fs::path& out) {
    const std::string m = effective_method(rc, cli);
    auto g = compute_by_method(rc, m, omega_grid_for(rc, cli));
    fp::Sidecar sc;
    sc.config_hash = rc.config_hash;
    sc.extra = {{"pulse", rc.pulse_description}};
    if (g.reliability_warning)
        sc.extra["warning"] = "asymptotics below validity floor eps = 20";
    fp::write_spectrum_csv(out / "spectrum.csv", g, sc);
    std::cout << "wrote " << (out / "spectrum.csv").string() << " (" << g.size()
              << " points, method " << to_string(g.method) << ")\n";
    return 0;
}

int run_state(const fp::RunConfig& rc, const CliOptions& cli, const fs::path& out) {
    auto grid = omega_grid_for(rc, cli);
    auto g = fp::spectrum_numeric(rc.phase, rc.drive, std::move(grid));
    fp::StateGridSpec gs;
    gs.n_rel = rc.p_rel_points;
    gs.n_cm = rc.p_cm_points;
    const auto st = fp::assemble_state(g, rc.setup, rc.delta_approx, gs);
    const auto metrics = fp::distribution_metrics(st, rc.setup);
    const auto report =
        fp::validate_regime(st, metrics, rc.setup, rc.drive, sweep_report(rc));

    fp::Sidecar sc;
    sc.config_hash = rc.config_hash;
    sc.method = "numeric";
    sc.drive = rc.drive;
    sc.tolerance_achieved = g.achieved_tol;
    fp::write_state_csv(out / "state.csv", st, sc);

    nlohmann::json jm;
    jm["peak_momentum"] = metrics.peak_momentum;
    jm["velocity_rel"] = metrics.velocity_rel;
    jm["velocity_atom"] = metrics.velocity_atom;
    jm["rms_width"] = metrics.rms_width;
    jm["ripple_fraction"] = metrics.ripple_fraction;
    jm["multimodal"] = metrics.multimodal;
    if (metrics.fwhm) jm["fwhm"] = *metrics.fwhm;
    if (!metrics.modes.empty()) jm["modes"] = metrics.modes;
    jm["dissociation_probability"] = st.prob;
    jm["norm_sq"] = st.norm_sq;
    jm["prob_warning"] = st.prob_warning;
    nlohmann::json jr;
    jr["all_pass"] = report.all_pass;
    for (const auto& c : report.checks)
        jr["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    nlohmann::json jout;
    jout["metrics"] = jm;
    jout["validity"] = jr;
    std::ofstream mo(out / "metrics.json");
    mo << jout.dump(2) << "\n";
    std::cout << "wrote " << (out / "state.csv").string() << " and metrics.json (prob "
              << st.prob << ")\n";
    if (st.prob_warning)
        std::cout << "warning: dissociation probability " << st.prob
                  << " exceeds the single-dissociation postselection regime (0.1)\n";
    if (cli.strict && !report.all_pass) {
        std::cerr << "validity report failed under --strict\n";
        return 4;
    }
    return 0;
}

int run_decay(const fp::RunConfig& rc, const CliOptions&, const fs::path& out) {
    auto times = time_grid_for(rc);
    const auto prof = fp::decay_profile(rc.phase, rc.drive, rc.setup, times);
    fp::Sidecar sc;
    sc.config_hash = rc.config_hash;
    sc.method = "decay_profile";
    sc.drive = rc.drive;
    sc.extra = {{"survival", prof.survival}, {"near_pole", prof.near_pole}};
    fp::write_decay_csv(out / "decay.csv", prof, sc);
    std::cout << "wrote " << (out / "decay.csv").string() << " (survival "
              << prof.survival << ")\n";

    // quasi-stationary n(E) over the strictly ascending part of the ramp
    std::vector<double> ts, es;
    for (double t : prof.times) {
        const double e = rc.drive.base_energy +
                         rc.drive.pulse_energy *
                             rc.phase.pulse(t / rc.drive.duration) -
                         rc.setup.u_cl();
        if (!es.empty() && e <= es.back()) {
            if (t > 0.0) break;
            continue;
        }
        ts.push_back(t);
        es.push_back(e);
    }
    if (ts.size() >= 16) {
        const auto dist = fp::quasi_stationary_distribution(ts, es, rc.setup);
        fp::Sidecar sn = sc;
        sn.method = "quasi_stationary";
        sn.extra = {{"survival", dist.survival}};
        fp::write_energy_csv(out / "n_of_E.csv", dist, sn);
        std::cout << "wrote " << (out / "n_of_E.csv").string() << "\n";
    } else {
        std::cout << "n(E) skipped: ramp is not strictly increasing over enough nodes\n";
    }
    return 0;
}

int run_optimize(const fp::RunConfig& rc, const CliOptions& cli, const fs::path& out) {
    fp::OptimizeSpec spec = rc.optimize.value_or(fp::OptimizeSpec{});
    const auto family = fp::PulseFamily::trapezoid_family(spec.lo, spec.hi);
    fp::OptimizeOptions oo;
    oo.max_evals = spec.max_evals;
    oo.objective = spec.objective;
    auto grid = omega_grid_for(rc, cli);
    const auto res = fp::optimize_pulse(family, rc.drive, grid, oo);
    fp::Sidecar sc;
    sc.config_hash = rc.config_hash;
    sc.method = to_string(spec.objective);
    sc.drive = rc.drive;
    sc.extra = {{"best", res.best},
                {"score", res.score},
                {"budget_exhausted", res.budget_exhausted}};
    fp::write_trace_csv(out / "trace.csv", res, family.param_names, sc);
    std::cout << "wrote " << (out / "trace.csv").string() << " (best s = "
              << res.best[0] << ", score " << res.score << ")\n";
    return 0;
}

int run_validate(const fp::RunConfig& rc, const CliOptions& cli, const fs::path& out) {
    auto g = fp::spectrum_numeric(rc.phase, rc.drive, omega_grid_for(rc, cli));
    fp::StateGridSpec gs;
    gs.n_rel = rc.p_rel_points;
    gs.n_cm = rc.p_cm_points;
    const auto st = fp::assemble_state(g, rc.setup, rc.delta_approx, gs);
    const auto metrics = fp::distribution_metrics(st, rc.setup);
    const auto report =
        fp::validate_regime(st, metrics, rc.setup, rc.drive, sweep_report(rc));
    nlohmann::json jr;
    jr["all_pass"] = report.all_pass;
    for (const auto& c : report.checks)
        jr["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    std::ofstream ro(out / "validity.json");
    ro << jr.dump(2) << "\n";
    for (const auto& c : report.checks)
        std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.name << ": " << c.detail
                  << "\n";
    if (cli.strict && !report.all_pass) return 4;
    return 0;
}

int run_compare(const fp::RunConfig& rc, const CliOptions& cli, const fs::path& out) {
    auto grid = omega_grid_for(rc, cli);
    const auto num = fp::spectrum_numeric(rc.phase, rc.drive, grid);
    std::string m = effective_method(rc, cli);
    if (m == "numeric") m = rc.pulse_is_square ? "square" : "stationary";
    const auto other = compute_by_method(rc, m, grid);
    double max_resid = 0.0, max_abs = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i)
        max_abs = std::max(max_abs, std::abs(num.values[i]));
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (!std::isfinite(other.values[i].real())) continue;
        if (std::abs(num.values[i]) > 1e-3 * max_abs)
            max_resid = std::max(max_resid,
                                 std::abs(num.values[i] - other.values[i]) /
                                     std::abs(num.values[i]));
    }
    fp::Sidecar sc;
    sc.config_hash = rc.config_hash;
    sc.method = "numeric_vs_" + m;
    sc.drive = rc.drive;
    sc.tolerance_achieved = num.achieved_tol;
    sc.extra = {{"max_relative_residual_above_floor", max_resid}};
    fp::write_compare_csv(out / "compare.csv", num, other, sc);
    std::cout << "wrote " << (out / "compare.csv").string()
              << " (max relative residual above 1e-3 floor: " << max_resid << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"feshpulse: dissociation spectra, states and pulse optimization "
                 "for pulsed Feshbach molecules in a waveguide"};
    app.require_subcommand(1);

    CliOptions cli;
    app.add_option("--config", cli.config_path, "JSON config file")->required();
    app.add_option("--out", cli.out_dir, "output directory (overrides config)");
    app.add_option("--method", cli.method,
                   "spectrum method: numeric|airy|stationary|square|auto");
    app.add_flag("--strict", cli.strict, "exit 4 when the validity report fails");
    app.add_option("--grid-points", cli.grid_points, "override omega grid point count");

    auto* sub_spectrum = app.add_subcommand("spectrum", "write the spectrum CSV");
    auto* sub_state = app.add_subcommand("state", "write the dissociation state + metrics");
    auto* sub_decay = app.add_subcommand("decay", "write the decay profile and n(E)");
    auto* sub_optimize = app.add_subcommand("optimize", "search the pulse family");
    auto* sub_validate = app.add_subcommand("validate", "write the regime report");
    auto* sub_compare = app.add_subcommand("compare", "numeric vs asymptotic residuals");

    CLI11_PARSE(app, argc, argv);

    try {
        const fp::RunConfig rc = fp::parse_config(cli.config_path);
        fs::path out = cli.out_dir.empty() ? fs::path(rc.out_dir) : fs::path(cli.out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec)
            throw fp::config_error("cannot create output directory: " + out.string());
        if (sub_spectrum->parsed()) return run_spectrum(rc, cli, out);
        if (sub_state->parsed()) return run_state(rc, cli, out);
        if (sub_decay->parsed()) return run_decay(rc, cli, out);
        if (sub_optimize->parsed()) return run_optimize(rc, cli, out);
        if (sub_validate->parsed()) return run_validate(rc, cli, out);
        if (sub_compare->parsed()) return run_compare(rc, cli, out);
        return 2;
    } catch (const fp::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fp::numeric_error& e) {
        std::cerr << "numeric error: " << e.what()
                  << " (achieved tolerance " << e.achieved_tolerance << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
