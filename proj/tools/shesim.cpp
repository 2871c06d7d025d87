// Command-line front end: simulate | check | region | converge | coeffs.
// Exit codes: 0 success, 1 runtime failure, 2 config error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "shesim/config.hpp"
#include "shesim/csv.hpp"
#include "shesim/json_out.hpp"
#include "shesim/svg.hpp"
#include "shesim/version.hpp"

namespace fs = std::filesystem;
using namespace shesim;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    int threads = 0;
};

KeyValueFile load_config(const CommonArgs& args) {
    KeyValueFile cfg = KeyValueFile::parse_file(args.config_path);
    for (const std::string& o : args.overrides) cfg.apply_override(o);
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("config", args.config_path, "experiment config file")->required();
    cmd->add_option("--set", args.overrides,
                    "override a config field, e.g. --set mc.paths=5000 (repeatable)");
    cmd->add_option("--threads", args.threads,
                    "worker threads (default: machine parallelism; never changes results)");
}

void write_manifest(const fs::path& dir, const std::string& command, const KeyValueFile& cfg,
                    std::uint64_t seed, int threads, std::vector<std::string> outputs) {
    const fs::path path = dir / (command + "_manifest.json");
    outputs.push_back(path.filename().string());
    jsonio::write(path, jsonio::manifest(command, cfg, seed, threads, outputs));
}

int cmd_simulate(const CommonArgs& args) {
    const KeyValueFile cfg = load_config(args);
    const SystemSpec spec = make_system(cfg);
    const InitialCondition initial = make_initial(cfg);
    const TimeConfig time = make_time(cfg);
    const McConfig mc = make_mc(cfg);
    const OutputConfig out = make_output(cfg);

    const GalerkinSystem sys = assemble(spec);
    const StateVector u0 = initial.project(spec.n);

    EnsembleConfig ec;
    ec.paths = mc.paths;
    ec.base_seed = mc.seed;
    ec.tau = time.tau;
    ec.n_steps = time.n_steps;
    ec.scheme = time.scheme;
    ec.threads = args.threads;
    const MeanSquareCurve curve = mean_square_curve(sys, ec, u0);

    std::vector<std::string> outputs;
    if (out.csv) {
        csv::write_curve(out.directory / "curve.csv", curve);
        outputs.push_back("curve.csv");
    }
    if (out.svg) {
        svg::Series mean{curve.t, curve.mean_sq, "#1f6fb2", "mean"};
        svg::Series upper;
        upper.color = "#9fc5e8";
        upper.label = "ci";
        upper.xs = curve.t;
        for (std::size_t i = 0; i < curve.t.size(); ++i)
            upper.ys.push_back(curve.mean_sq[i] + curve.ci_halfwidth[i]);
        const bool log_scale = cfg.get_bool_or("output", "log_scale", false);
        svg::line_plot(out.directory / "curve.svg", {mean, upper}, "mean-square curve", "t",
                       "E ||U||^2", log_scale);
        outputs.push_back("curve.svg");
    }
    if (out.trajectory) {
        NoisePathConfig nc;
        nc.m = spec.m;
        nc.tau = time.tau;
        nc.n_steps = time.n_steps;
        nc.base_seed = mc.seed;
        nc.path_index = 0;
        const Trajectory traj =
            integrate(sys, time.scheme, u0, generate_increments(sys.alpha, nc), time.tau, true);
        csv::write_trajectory(out.directory / "trajectory.csv", traj);
        outputs.push_back("trajectory.csv");
    }
    write_manifest(out.directory, "simulate", cfg, mc.seed, args.threads, outputs);
    std::cout << "simulate: " << curve.t.size() - 1 << " steps x " << mc.paths << " paths, "
              << curve.diverged_count << " diverged; wrote " << out.directory.string() << "\n";
    return 0;
}

int cmd_check(const CommonArgs& args) {
    const KeyValueFile cfg = load_config(args);
    const SystemSpec spec = make_system(cfg);
    const TimeConfig time = make_time(cfg);
    const OutputConfig out = make_output(cfg);
    const std::uint64_t seed = cfg.has_section("mc")
                                   ? static_cast<std::uint64_t>(cfg.get_int_or("mc", "seed", 0))
                                   : 0;

    const GalerkinSystem sys = assemble(spec);
    const StabilityReport rep = make_stability_report(sys, time.tau);

    auto verdict = [](const ConditionCheck& c) {
        return !c.applicable ? "inapplicable" : (c.stable ? "stable" : "unstable");
    };
    std::printf("stability report (N=%d, M=%d, beta0=%g, beta1=%g, tau=%g)\n", rep.n, rep.m,
                spec.beta0, spec.beta1, rep.tau);
    std::printf("  lambda1                 %.10g\n", rep.lambda1);
    std::printf("  kappa                   %.10g%s\n", rep.kappa,
                rep.kappa_is_grid_estimate ? "  (grid estimate)" : "");
    std::printf("  kappa_tilde2            %.10g\n", rep.kappa_tilde2);
    std::printf("  rho(M)                  %.10g\n", rep.rho_at_m);
    std::printf("  sum q_j                 %.10g\n", rep.sum_weights);
    std::printf("  alpha jitter            %.3g\n", rep.alpha_jitter);
    std::printf("  exact condition margin  %.10g  -> %s\n", rep.exact.margin, verdict(rep.exact));
    std::printf("  spectral margin         %.10g  -> %s\n", rep.spectral.margin,
                verdict(rep.spectral));
    if (rep.implicit_ratio_valid)
        std::printf("  implicit amplification  %.10g  -> %s\n", rep.implicit_ratio,
                    rep.implicit_stable ? "stable" : "unstable");
    else
        std::printf("  implicit amplification  undefined (1 + tau*(lambda1+beta0) <= 0)\n");
    std::printf("  explicit lhs            %.10g  -> %s\n", rep.explicit_lhs,
                rep.explicit_stable ? "stable" : "unstable");

    std::vector<std::string> outputs;
    if (out.json) {
        jsonio::write(out.directory / "stability_report.json", jsonio::to_json(rep));
        outputs.push_back("stability_report.json");
    }
    write_manifest(out.directory, "check", cfg, seed, args.threads, outputs);
    return 0;
}

int cmd_region(const CommonArgs& args) {
    const KeyValueFile cfg = load_config(args);
    const SystemSpec spec = make_system(cfg);
    const TimeConfig time = make_time(cfg);
    const McConfig mc = make_mc(cfg);
    const OutputConfig out = make_output(cfg);
    const RegionOptions opt = make_region(cfg, time, mc, args.threads);

    const RegionGrid grid = region_sweep(spec, opt);

    std::vector<std::string> outputs;
    if (out.csv) {
        csv::write_region(out.directory / "region.csv", grid);
        outputs.push_back("region.csv");
    }
    if (out.svg) {
        svg::region_heatmap(out.directory / "region.svg", grid, "mean-square stability region");
        outputs.push_back("region.svg");
    }
    write_manifest(out.directory, "region", cfg, mc.seed, args.threads, outputs);
    std::size_t stable = 0;
    for (const auto c : grid.numeric_stable) stable += c;
    std::cout << "region: " << grid.beta1s.size() << "x" << grid.beta0s.size() << " grid, "
              << stable << " numerically stable cells; wrote " << out.directory.string() << "\n";
    return 0;
}

int cmd_converge(const CommonArgs& args) {
    const KeyValueFile cfg = load_config(args);
    const SystemSpec spec = make_system(cfg);
    const InitialCondition initial = make_initial(cfg);
    const TimeConfig time = make_time(cfg);
    const McConfig mc = make_mc(cfg);
    const OutputConfig out = make_output(cfg);
    const ConvergenceConfig cc = make_converge(cfg, spec, time, mc, args.threads);

    auto u0 = [&](double x) {
        // Projection happens per level; reuse the named initial condition.
        const InitialCondition ic = initial;
        switch (ic.kind) {
            case InitialCondition::Kind::PolyX1mX: return x * (1.0 - x);
            case InitialCondition::Kind::Mode: return eval_eigenfunction(ic.mode, x);
            case InitialCondition::Kind::Coefficients: {
                double s = 0.0;
                for (std::size_t k = 0; k < ic.coeffs.size(); ++k)
                    s += ic.coeffs[k] * eval_eigenfunction(static_cast<int>(k) + 1, x);
                return s;
            }
        }
        return 0.0;
    };
    const ConvergenceReport rep = coupled_error_study(spec.covariance, cc, u0);

    std::vector<std::string> outputs;
    if (out.csv) {
        csv::write_convergence(out.directory / "convergence.csv", rep);
        outputs.push_back("convergence.csv");
    }
    if (out.json) {
        jsonio::write(out.directory / "convergence_summary.json", jsonio::to_json(rep));
        outputs.push_back("convergence_summary.json");
    }
    write_manifest(out.directory, "converge", cfg, mc.seed, args.threads, outputs);
    std::cout << "converge: " << rep.levels.size() << " levels vs reference (" << rep.n_ref << ","
              << rep.m_ref << ")";
    if (rep.has_slope_n) std::cout << "; slope vs lambda_N = " << rep.slope_n;
    if (rep.has_slope_m) std::cout << "; slope vs M = " << rep.slope_m;
    std::cout << "; wrote " << out.directory.string() << "\n";
    return 0;
}

int cmd_coeffs(const CommonArgs& args, const std::string& what) {
    const KeyValueFile cfg = load_config(args);
    const SystemSpec spec = make_system(cfg);
    const OutputConfig out = make_output(cfg);

    std::vector<std::string> outputs;
    if (what == "tensor") {
        csv::write_tensor(out.directory / "tensor.csv", build_tensor(spec.n, spec.m));
        outputs.push_back("tensor.csv");
    } else if (what == "alpha") {
        csv::write_alpha(out.directory / "alpha.csv", alpha_matrix(spec.covariance, spec.m));
        outputs.push_back("alpha.csv");
    } else {
        throw ConfigError("coeffs --what must be tensor or alpha, got '" + what + "'");
    }
    write_manifest(out.directory, "coeffs", cfg, 0, args.threads, outputs);
    std::cout << "coeffs: wrote " << outputs.front() << " to " << out.directory.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral-Galerkin simulator and stability analyzer for the stochastic heat "
                 "equation on [0,1]"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonArgs sim_args, check_args, region_args, converge_args, coeffs_args;
    std::string coeffs_what = "tensor";

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo mean-square curve");
    add_common(sim, sim_args);
    CLI::App* check = app.add_subcommand("check", "stability condition report");
    add_common(check, check_args);
    CLI::App* region = app.add_subcommand("region", "(beta1, beta0) stability-region sweep");
    add_common(region, region_args);
    CLI::App* converge = app.add_subcommand("converge", "coupled-noise refinement study");
    add_common(converge, converge_args);
    CLI::App* coeffs = app.add_subcommand("coeffs", "dump coefficient tables");
    add_common(coeffs, coeffs_args);
    coeffs->add_option("--what", coeffs_what, "tensor | alpha")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // help / version
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (check->parsed()) return cmd_check(check_args);
        if (region->parsed()) return cmd_region(region_args);
        if (converge->parsed()) return cmd_converge(converge_args);
        if (coeffs->parsed()) return cmd_coeffs(coeffs_args, coeffs_what);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
