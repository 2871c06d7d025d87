#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "shesim/covariance.hpp"
#include "shesim/galerkin.hpp"
#include "shesim/montecarlo.hpp"
#include "shesim/parallel.hpp"
#include "shesim/rng.hpp"

// Analytical stability condition checkers, scheme amplification factors,
// and (beta1, beta0) stability-region sweeps.

namespace shesim {

struct ConditionCheck {
    double margin = 0.0;
    bool stable = false;
    bool applicable = true;
};

// Margin of 2(lambda_1 + beta0) - beta1^2 kappa; inapplicable when kappa
// is not finite (singular-diagonal covariances).
inline ConditionCheck check_exact(double lambda1, double beta0, double beta1, double kappa_val) {
    ConditionCheck c;
    if (!std::isfinite(kappa_val)) {
        c.margin = std::numeric_limits<double>::quiet_NaN();
        c.stable = false;
        c.applicable = false;
        return c;
    }
    if (kappa_val < 0.0) throw std::domain_error("check_exact: kappa must be nonnegative");
    c.margin = 2.0 * (lambda1 + beta0) - beta1 * beta1 * kappa_val;
    c.stable = c.margin > 0.0;
    return c;
}

// Per-step mean-square bound of the implicit scheme,
// (1 + tau kt2 beta1^2) / (1 + tau (lambda1 + beta0))^2.
inline double implicit_amplification(double tau, double lambda1, double beta0, double beta1,
                                     double kappa_tilde2_val) {
    const double denom_root = 1.0 + tau * (lambda1 + beta0);
    if (!(denom_root > 0.0))
        throw std::domain_error("implicit_amplification: 1 + tau*(lambda1+beta0) must be positive");
    return (1.0 + tau * kappa_tilde2_val * beta1 * beta1) / (denom_root * denom_root);
}

struct ExplicitCondition {
    double lhs = 0.0;
    bool stable = false;
};

// Explicit-Euler condition: max_k (1 - tau d_k)^2 + tau kt2 beta1^2 < 1.
inline ExplicitCondition check_explicit(double tau, const Eigen::VectorXd& drift_diag,
                                        double beta1, double kappa_tilde2_val) {
    if (!(tau > 0.0)) throw std::domain_error("check_explicit: tau must be positive");
    if (drift_diag.size() == 0) throw std::domain_error("check_explicit: empty drift");
    double worst = 0.0;
    for (int k = 0; k < drift_diag.size(); ++k) {
        const double g = 1.0 - tau * drift_diag(k);
        worst = std::max(worst, g * g);
    }
    ExplicitCondition c;
    c.lhs = worst + tau * kappa_tilde2_val * beta1 * beta1;
    c.stable = c.lhs < 1.0;
    return c;
}

struct StabilityReport {
    int n = 0, m = 0;
    double tau = 0.0;
    double lambda1 = 0.0;
    double kappa = 0.0;
    bool kappa_is_grid_estimate = true;
    double kappa_tilde2 = 0.0;
    double rho_at_m = 0.0;
    double sum_weights = 0.0;  // NaN for kernel models
    double alpha_jitter = 0.0;
    ConditionCheck exact;     // condition on the continuum equation
    ConditionCheck spectral;  // same margin with kappa_tilde2
    double implicit_ratio = 0.0;
    bool implicit_ratio_valid = false;
    bool implicit_stable = false;
    double explicit_lhs = 0.0;
    bool explicit_stable = false;
};

inline StabilityReport make_stability_report(const GalerkinSystem& sys, double tau,
                                             int kappa_grid_n = 10000, int rho_tail_cap = 0) {
    if (!(tau > 0.0)) throw std::domain_error("make_stability_report: tau must be positive");
    const SystemSpec& spec = sys.spec;
    StabilityReport r;
    r.n = spec.n;
    r.m = spec.m;
    r.tau = tau;
    r.lambda1 = spec.drift_scale * eigenvalue(1);
    r.kappa = kappa(spec.covariance, kappa_grid_n);
    r.sum_weights = spec.covariance.sum_weights();
    r.alpha_jitter = sys.alpha.jitter;

    const TripleProductTensor tensor(spec.n, spec.m);
    r.kappa_tilde2 = kappa_tilde2(sys.alpha, tensor, spec.n, spec.m);
    if (rho_tail_cap <= spec.m) rho_tail_cap = 4 * spec.m;
    r.rho_at_m = rho(spec.covariance, spec.m, rho_tail_cap);

    r.exact = check_exact(r.lambda1, spec.beta0, spec.beta1, r.kappa);
    r.spectral = check_exact(r.lambda1, spec.beta0, spec.beta1, r.kappa_tilde2);

    if (1.0 + tau * (r.lambda1 + spec.beta0) > 0.0) {
        r.implicit_ratio =
            implicit_amplification(tau, r.lambda1, spec.beta0, spec.beta1, r.kappa_tilde2);
        r.implicit_ratio_valid = true;
        r.implicit_stable = r.implicit_ratio < 1.0;
    }
    const ExplicitCondition ec = check_explicit(tau, sys.drift_diag, spec.beta1, r.kappa_tilde2);
    r.explicit_lhs = ec.lhs;
    r.explicit_stable = ec.stable;
    return r;
}

enum class RegionClassifier { Analytic, MonteCarlo };

struct RegionOptions {
    double beta1_min = 0.0, beta1_max = 4.0;
    int beta1_count = 64;
    double beta0_min = -12.0, beta0_max = 20.0;
    int beta0_count = 64;
    double tau = 0.01;
    StepScheme scheme = StepScheme::ImplicitEuler;
    RegionClassifier classifier = RegionClassifier::Analytic;
    int mc_paths = 400;
    double mc_horizon = 5.0;
    std::uint64_t base_seed = 0;
    int threads = 0;
};

struct RegionGrid {
    std::vector<double> beta1s;
    std::vector<double> beta0s;
    // Row-major over (beta0 index, beta1 index).
    std::vector<std::uint8_t> analytic_stable;
    std::vector<std::uint8_t> numeric_stable;
    std::vector<double> metric;  // amplification / lhs / fitted MC rate
    double kappa = 0.0;
    double kappa_tilde2 = 0.0;
    double lambda1 = 0.0;

    std::size_t idx(int i0, int i1) const {
        return static_cast<std::size_t>(i0) * beta1s.size() + static_cast<std::size_t>(i1);
    }
};

namespace detail {

inline std::vector<double> axis(double lo, double hi, int count) {
    if (count < 1) throw std::domain_error("region_sweep: axis count must be >= 1");
    if (count > 1 && !(hi > lo))
        throw std::domain_error("region_sweep: axis range must be increasing");
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] =
            count == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(count - 1);
    return v;
}

}  // namespace detail

// Classifies every (beta1, beta0) cell as stable/unstable, analytically
// (condition margins and amplification factors) or by Monte Carlo decay
// fitting. Each cell's MC stream is derived from (base_seed, cell index).
inline RegionGrid region_sweep(const SystemSpec& base, const RegionOptions& opt) {
    base.validate();
    if (opt.classifier == RegionClassifier::Analytic &&
        opt.scheme == StepScheme::StiffImplicitEuler)
        throw std::invalid_argument(
            "region_sweep: no closed-form classifier for the stiff-implicit scheme; use the "
            "monte-carlo classifier");
    if (opt.classifier == RegionClassifier::MonteCarlo && opt.mc_paths < 100)
        throw std::domain_error("region_sweep: monte-carlo classifier needs >= 100 paths");

    RegionGrid grid;
    grid.beta1s = detail::axis(opt.beta1_min, opt.beta1_max, opt.beta1_count);
    grid.beta0s = detail::axis(opt.beta0_min, opt.beta0_max, opt.beta0_count);
    const std::size_t cells = grid.beta1s.size() * grid.beta0s.size();
    grid.analytic_stable.assign(cells, 0);
    grid.numeric_stable.assign(cells, 0);
    grid.metric.assign(cells, 0.0);

    grid.lambda1 = base.drift_scale * eigenvalue(1);
    grid.kappa = kappa(base.covariance);
    GalerkinSystem proto = assemble(base);
    const TripleProductTensor tensor(base.n, base.m);
    grid.kappa_tilde2 = kappa_tilde2(proto.alpha, tensor, base.n, base.m);

    const StateVector u0 =
        project_initial([](double x) { return x * (1.0 - x); }, base.n);

    const int n1 = static_cast<int>(grid.beta1s.size());
    const int n0 = static_cast<int>(grid.beta0s.size());
    auto classify_cell = [&](std::size_t cell) {
        const int i0 = static_cast<int>(cell) / n1;
        const int i1 = static_cast<int>(cell) % n1;
        const double b1 = grid.beta1s[static_cast<std::size_t>(i1)];
        const double b0 = grid.beta0s[static_cast<std::size_t>(i0)];

        grid.analytic_stable[cell] = check_exact(grid.lambda1, b0, b1, grid.kappa).stable ? 1 : 0;

        if (opt.classifier == RegionClassifier::Analytic) {
            if (opt.scheme == StepScheme::ImplicitEuler) {
                if (1.0 + opt.tau * (grid.lambda1 + b0) > 0.0) {
                    const double ratio =
                        implicit_amplification(opt.tau, grid.lambda1, b0, b1, grid.kappa_tilde2);
                    grid.metric[cell] = ratio;
                    grid.numeric_stable[cell] = ratio < 1.0 ? 1 : 0;
                } else {
                    grid.metric[cell] = std::numeric_limits<double>::infinity();
                    grid.numeric_stable[cell] = 0;
                }
            } else {
                const ExplicitCondition ec =
                    check_explicit(opt.tau, (proto.drift_diag.array() - base.beta0 + b0).matrix(),
                                   b1, grid.kappa_tilde2);
                grid.metric[cell] = ec.lhs;
                grid.numeric_stable[cell] = ec.stable ? 1 : 0;
            }
            return;
        }

        // Monte Carlo decay classification.
        GalerkinSystem sys = with_betas(proto, b0, b1);
        EnsembleConfig cfg;
        cfg.paths = opt.mc_paths;
        cfg.base_seed = rng::stream_key(opt.base_seed, cell, 0x7265676eULL, 0);
        cfg.tau = opt.tau;
        cfg.n_steps = std::max(20, static_cast<int>(std::llround(opt.mc_horizon / opt.tau)));
        cfg.scheme = opt.scheme;
        cfg.threads = 1;  // parallelism lives at cell level
        try {
            const MeanSquareCurve curve = mean_square_curve(sys, cfg, u0);
            if (curve.diverged_count > 0) {
                grid.metric[cell] = std::numeric_limits<double>::infinity();
                grid.numeric_stable[cell] = 0;
                return;
            }
            const RateFit fit = decay_rate_fit(curve, 0.5);
            grid.metric[cell] = fit.rate;
            grid.numeric_stable[cell] = (fit.rate + 2.0 * fit.stderr_ < 0.0) ? 1 : 0;
        } catch (const std::runtime_error&) {
            grid.metric[cell] = std::numeric_limits<double>::infinity();
            grid.numeric_stable[cell] = 0;
        }
    };

    if (opt.classifier == RegionClassifier::Analytic) {
        for (std::size_t cell = 0; cell < cells; ++cell) classify_cell(cell);
    } else {
        parallel_for(cells, resolve_threads(opt.threads), classify_cell);
    }
    return grid;
}

}  // namespace shesim
