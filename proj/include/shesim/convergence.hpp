#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shesim/integrators.hpp"
#include "shesim/parallel.hpp"
#include "shesim/stats.hpp"

// Coupled-noise refinement study: every discretization level runs on the
// restriction of one fine noise path, so differences measure only the
// spatial/noise truncation error. Supported for diagonal covariance models
// only, where restriction preserves the coarse law exactly.

namespace shesim {

struct LevelRecord {
    int n = 0, m = 0;
    double lambda_n = 0.0;
    double rho_m = 0.0;
    double error = 0.0;  // mean over paths of the max coupled error over checkpoints
    double ci_halfwidth = 0.0;
};

struct ConvergenceReport {
    int n_ref = 0, m_ref = 0;
    double tau = 0.0;
    double horizon = 0.0;
    int paths = 0;
    double beta0 = 0.0, beta1 = 0.0;
    std::vector<LevelRecord> levels;  // user-requested levels, input order

    bool has_slope_n = false;
    double slope_n = 0.0, slope_n_stderr = 0.0;  // log error vs log lambda_N
    bool has_slope_m = false;
    double slope_m = 0.0, slope_m_stderr = 0.0;  // log error vs log M

    // Error floor probes: one refinement step below the reference in each
    // direction. A fit is only trusted when the coarsest ladder error sits
    // well above the floor.
    double floor_n = 0.0, floor_m = 0.0;
    bool fit_trusted_n = false, fit_trusted_m = false;
};

struct ConvergenceConfig {
    std::vector<std::pair<int, int>> levels;  // (N, M)
    int n_ref = 64, m_ref = 64;
    double beta0 = 0.0, beta1 = 1.0;
    double tau = 1e-3;
    double horizon = 0.5;
    int paths = 200;
    std::uint64_t base_seed = 0;
    int threads = 0;
    int checkpoints = 50;  // error is maximised over this many recorded times
};

inline ConvergenceReport coupled_error_study(const CovarianceModel& model,
                                             const ConvergenceConfig& cfg,
                                             const std::function<double(double)>& u0) {
    if (!model.is_diagonal())
        throw std::invalid_argument("coupled_error_study: requires a diagonal covariance model");
    if (cfg.levels.empty()) throw std::domain_error("coupled_error_study: no levels given");
    if (cfg.n_ref < 1 || cfg.m_ref < 1)
        throw std::domain_error("coupled_error_study: reference resolution must be >= 1");
    if (cfg.paths < 1) throw std::domain_error("coupled_error_study: need at least one path");
    if (!(cfg.tau > 0.0 && cfg.horizon > 0.0))
        throw std::domain_error("coupled_error_study: tau and horizon must be positive");
    for (const auto& [n, m] : cfg.levels) {
        if (n < 1 || m < 1) throw std::domain_error("coupled_error_study: level indices >= 1");
        if (n > cfg.n_ref || m > cfg.m_ref)
            throw std::invalid_argument(
                "coupled_error_study: reference resolution must be at least as fine as every "
                "level");
    }

    const int n_steps = std::max(1, static_cast<int>(std::llround(cfg.horizon / cfg.tau)));
    const int n_check = std::max(1, std::min(cfg.checkpoints, n_steps));

    // Checkpoint step indices, including t = 0 and the final step.
    std::vector<int> check_steps;
    check_steps.push_back(0);
    for (int c = 1; c <= n_check; ++c)
        check_steps.push_back(static_cast<int>(std::llround(
            static_cast<double>(c) * n_steps / static_cast<double>(n_check))));
    check_steps.erase(std::unique(check_steps.begin(), check_steps.end()), check_steps.end());

    // All levels to integrate: user levels plus the two floor probes.
    std::vector<std::pair<int, int>> all_levels = cfg.levels;
    const std::pair<int, int> probe_n{std::max(1, cfg.n_ref / 2), cfg.m_ref};
    const std::pair<int, int> probe_m{cfg.n_ref, std::max(1, cfg.m_ref / 2)};
    auto ensure = [&](std::pair<int, int> p) -> std::size_t {
        const auto it = std::find(all_levels.begin(), all_levels.end(), p);
        if (it != all_levels.end()) return static_cast<std::size_t>(it - all_levels.begin());
        all_levels.push_back(p);
        return all_levels.size() - 1;
    };
    const std::size_t probe_n_idx = ensure(probe_n);
    const std::size_t probe_m_idx = ensure(probe_m);

    SystemSpec ref_spec;
    ref_spec.n = cfg.n_ref;
    ref_spec.m = cfg.m_ref;
    ref_spec.beta0 = cfg.beta0;
    ref_spec.beta1 = cfg.beta1;
    ref_spec.covariance = model;
    const GalerkinSystem ref_sys = assemble(ref_spec);

    std::vector<GalerkinSystem> level_sys;
    level_sys.reserve(all_levels.size());
    for (const auto& [n, m] : all_levels) {
        SystemSpec s = ref_spec;
        s.n = n;
        s.m = m;
        level_sys.push_back(assemble(s));
    }

    const StateVector u0_ref = project_initial(u0, cfg.n_ref);

    const std::size_t n_levels = all_levels.size();
    std::vector<double> per_path(static_cast<std::size_t>(cfg.paths) * n_levels, 0.0);

    parallel_for(static_cast<std::size_t>(cfg.paths), resolve_threads(cfg.threads),
                 [&](std::size_t path) {
                     NoisePathConfig nc;
                     nc.m = cfg.m_ref;
                     nc.tau = cfg.tau;
                     nc.n_steps = n_steps;
                     nc.base_seed = cfg.base_seed;
                     nc.path_index = path;
                     const NoiseIncrements fine = generate_increments(ref_sys.alpha, nc);
                     const Trajectory ref_traj = integrate(ref_sys, StepScheme::ImplicitEuler,
                                                           u0_ref, fine, cfg.tau, true);
                     if (ref_traj.diverged)
                         throw std::runtime_error(
                             "coupled_error_study: reference trajectory diverged (parameters "
                             "outside the stable regime)");

                     for (std::size_t l = 0; l < n_levels; ++l) {
                         const auto& [n, m] = all_levels[l];
                         const GalerkinSystem& sys = level_sys[l];
                         const NoiseIncrements coarse = restrict_increments(fine, m);
                         const StateVector u0_lvl = u0_ref.head(n);
                         const Trajectory traj =
                             integrate(sys, StepScheme::ImplicitEuler, u0_lvl, coarse, cfg.tau, true);
                         if (traj.diverged)
                             throw std::runtime_error(
                                 "coupled_error_study: level trajectory diverged");

                         double worst = 0.0;
                         for (int s : check_steps) {
                             const Eigen::VectorXd& ur = ref_traj.states[static_cast<std::size_t>(s)];
                             const Eigen::VectorXd& ul = traj.states[static_cast<std::size_t>(s)];
                             // Zero-padded comparison in the common space.
                             double d = (ur.head(n) - ul).squaredNorm();
                             if (n < cfg.n_ref) d += ur.tail(cfg.n_ref - n).squaredNorm();
                             worst = std::max(worst, d);
                         }
                         per_path[path * n_levels + l] = worst;
                     }
                 });

    ConvergenceReport rep;
    rep.n_ref = cfg.n_ref;
    rep.m_ref = cfg.m_ref;
    rep.tau = cfg.tau;
    rep.horizon = cfg.horizon;
    rep.paths = cfg.paths;
    rep.beta0 = cfg.beta0;
    rep.beta1 = cfg.beta1;

    std::vector<double> level_mean(n_levels), level_ci(n_levels);
    std::vector<double> sample(static_cast<std::size_t>(cfg.paths));
    for (std::size_t l = 0; l < n_levels; ++l) {
        for (int p = 0; p < cfg.paths; ++p)
            sample[static_cast<std::size_t>(p)] = per_path[static_cast<std::size_t>(p) * n_levels + l];
        const stats::MeanCi mc = stats::mean_ci(sample);
        level_mean[l] = mc.mean;
        level_ci[l] = mc.ci_halfwidth;
    }

    for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
        LevelRecord rec;
        rec.n = cfg.levels[l].first;
        rec.m = cfg.levels[l].second;
        rec.lambda_n = eigenvalue(rec.n);
        rec.rho_m = rho(model, rec.m, 4 * rec.m);
        rec.error = level_mean[l];
        rec.ci_halfwidth = level_ci[l];
        rep.levels.push_back(rec);
    }
    rep.floor_n = level_mean[probe_n_idx];
    rep.floor_m = level_mean[probe_m_idx];

    // Ladder fits over user levels strictly coarser than the reference in
    // the varied direction.
    std::vector<double> lx, ly;
    for (const LevelRecord& rec : rep.levels)
        if (rec.m == cfg.m_ref && rec.n < cfg.n_ref && rec.error > 0.0) {
            lx.push_back(std::log(rec.lambda_n));
            ly.push_back(std::log(rec.error));
        }
    if (lx.size() >= 2) {
        const stats::OlsFit fit = stats::ols(lx, ly);
        rep.has_slope_n = true;
        rep.slope_n = fit.slope;
        rep.slope_n_stderr = fit.slope_stderr;
        double coarsest = 0.0;
        for (const LevelRecord& rec : rep.levels)
            if (rec.m == cfg.m_ref && rec.n < cfg.n_ref) coarsest = std::max(coarsest, rec.error);
        rep.fit_trusted_n = coarsest >= 10.0 * rep.floor_n;
    }

    lx.clear();
    ly.clear();
    for (const LevelRecord& rec : rep.levels)
        if (rec.n == cfg.n_ref && rec.m < cfg.m_ref && rec.error > 0.0) {
            lx.push_back(std::log(static_cast<double>(rec.m)));
            ly.push_back(std::log(rec.error));
        }
    if (lx.size() >= 2) {
        const stats::OlsFit fit = stats::ols(lx, ly);
        rep.has_slope_m = true;
        rep.slope_m = fit.slope;
        rep.slope_m_stderr = fit.slope_stderr;
        double coarsest = 0.0;
        for (const LevelRecord& rec : rep.levels)
            if (rec.n == cfg.n_ref && rec.m < cfg.m_ref) coarsest = std::max(coarsest, rec.error);
        rep.fit_trusted_m = coarsest >= 10.0 * rep.floor_m;
    }

    return rep;
}

}  // namespace shesim
