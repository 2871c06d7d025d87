#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shesim/integrators.hpp"
#include "shesim/parallel.hpp"

// Ensemble estimation of E||U_n||^2 with confidence intervals and
// exponential decay-rate fitting. Paths are independent work items;
// aggregation reduces fixed-size path blocks in block order, so results do
// not depend on the thread count.

namespace shesim {

struct EnsembleConfig {
    int paths = 1000;
    std::uint64_t base_seed = 0;
    double tau = 1e-3;
    int n_steps = 1000;
    StepScheme scheme = StepScheme::ImplicitEuler;
    int threads = 0;  // 0 = machine parallelism
};

struct MeanSquareCurve {
    std::vector<double> t;
    std::vector<double> mean_sq;      // mean over non-diverged paths
    std::vector<double> ci_halfwidth; // 95%, normal approximation
    long diverged_count = 0;
    int paths = 0;
    double tau = 0.0;
};

inline MeanSquareCurve mean_square_curve(const GalerkinSystem& sys, const EnsembleConfig& cfg,
                                         const StateVector& u0) {
    if (cfg.paths < 1) throw std::domain_error("mean_square_curve: need at least one path");
    if (cfg.n_steps < 1) throw std::domain_error("mean_square_curve: need at least one step");
    if (!(cfg.tau > 0.0)) throw std::domain_error("mean_square_curve: tau must be positive");

    const std::size_t len = static_cast<std::size_t>(cfg.n_steps) + 1;
    constexpr int kBlock = 32;  // fixed block size keeps the reduction order canonical
    const int blocks = (cfg.paths + kBlock - 1) / kBlock;

    struct Partial {
        std::vector<double> sum, sumsq, lo, hi;
        long alive = 0, diverged = 0;
    };
    std::vector<Partial> partials(static_cast<std::size_t>(blocks));

    parallel_for(static_cast<std::size_t>(blocks), resolve_threads(cfg.threads),
                 [&](std::size_t b) {
                     Partial& p = partials[b];
                     p.sum.assign(len, 0.0);
                     p.sumsq.assign(len, 0.0);
                     p.lo.assign(len, std::numeric_limits<double>::infinity());
                     p.hi.assign(len, -std::numeric_limits<double>::infinity());
                     const int first = static_cast<int>(b) * kBlock;
                     const int last = std::min(cfg.paths, first + kBlock);
                     for (int path = first; path < last; ++path) {
                         NoisePathConfig nc;
                         nc.m = sys.m();
                         nc.tau = cfg.tau;
                         nc.n_steps = cfg.n_steps;
                         nc.base_seed = cfg.base_seed;
                         nc.path_index = static_cast<std::uint64_t>(path);
                         const NoiseIncrements inc = generate_increments(sys.alpha, nc);
                         const Trajectory traj = integrate(sys, cfg.scheme, u0, inc, cfg.tau);
                         if (traj.diverged) {
                             ++p.diverged;
                             continue;
                         }
                         ++p.alive;
                         for (std::size_t i = 0; i < len; ++i) {
                             const double v = traj.norm_sq[i];
                             p.sum[i] += v;
                             p.sumsq[i] += v * v;
                             p.lo[i] = std::min(p.lo[i], v);
                             p.hi[i] = std::max(p.hi[i], v);
                         }
                     }
                 });

    std::vector<double> sum(len, 0.0), sumsq(len, 0.0);
    std::vector<double> lo(len, std::numeric_limits<double>::infinity());
    std::vector<double> hi(len, -std::numeric_limits<double>::infinity());
    long alive = 0, diverged = 0;
    for (const Partial& p : partials) {
        alive += p.alive;
        diverged += p.diverged;
        if (p.alive == 0) continue;
        for (std::size_t i = 0; i < len; ++i) {
            sum[i] += p.sum[i];
            sumsq[i] += p.sumsq[i];
            lo[i] = std::min(lo[i], p.lo[i]);
            hi[i] = std::max(hi[i], p.hi[i]);
        }
    }
    if (alive == 0) throw std::runtime_error("mean_square_curve: every path diverged");

    MeanSquareCurve curve;
    curve.paths = cfg.paths;
    curve.tau = cfg.tau;
    curve.diverged_count = diverged;
    curve.t.resize(len);
    curve.mean_sq.resize(len);
    curve.ci_halfwidth.resize(len);
    const double p_alive = static_cast<double>(alive);
    for (std::size_t i = 0; i < len; ++i) {
        curve.t[i] = static_cast<double>(i) * cfg.tau;
        if (lo[i] == hi[i]) {
            // Degenerate sample (e.g. beta1 = 0): the mean is the common
            // value and the interval collapses exactly.
            curve.mean_sq[i] = lo[i];
            curve.ci_halfwidth[i] = 0.0;
            continue;
        }
        const double mean = sum[i] / p_alive;
        curve.mean_sq[i] = mean;
        if (alive > 1) {
            double var = (sumsq[i] - sum[i] * sum[i] / p_alive) / (p_alive - 1.0);
            var = std::max(var, 0.0);
            curve.ci_halfwidth[i] = 1.959963984540054 * std::sqrt(var / p_alive);
        } else {
            curve.ci_halfwidth[i] = 0.0;
        }
    }
    return curve;
}

struct RateFit {
    double rate = 0.0;
    double stderr_ = 0.0;
    int points = 0;
};

// Least-squares slope of log mean_sq versus t over the trailing
// `tail_fraction` of the curve.
inline RateFit decay_rate_fit(const MeanSquareCurve& curve, double tail_fraction = 0.5) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw std::domain_error("decay_rate_fit: tail fraction must lie in (0,1]");
    const std::size_t len = curve.t.size();
    if (len < 2) throw std::domain_error("decay_rate_fit: curve too short");
    const double t_end = curve.t.back();
    const double t_start = t_end * (1.0 - tail_fraction);

    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < len; ++i) {
        if (curve.t[i] + 1e-12 * std::max(t_end, 1.0) < t_start) continue;
        if (!(curve.mean_sq[i] > 0.0))
            throw std::runtime_error(
                "decay_rate_fit: nonpositive mean square in fit window (path divergence "
                "suspected)");
        ts.push_back(curve.t[i]);
        ys.push_back(std::log(curve.mean_sq[i]));
    }
    const std::size_t n = ts.size();
    if (n < 10) throw std::runtime_error("decay_rate_fit: fewer than 10 points in fit window");

    double tbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tbar += ts[i];
        ybar += ys[i];
    }
    tbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (ts[i] - tbar) * (ts[i] - tbar);
        sxy += (ts[i] - tbar) * (ys[i] - ybar);
    }
    RateFit fit;
    fit.points = static_cast<int>(n);
    fit.rate = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - ybar - fit.rate * (ts[i] - tbar);
        rss += r * r;
    }
    fit.stderr_ = n > 2 ? std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
    return fit;
}

}  // namespace shesim
