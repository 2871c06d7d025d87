#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "shesim/galerkin.hpp"
#include "shesim/noise.hpp"

// One-step maps for the three temporal schemes and full-trajectory
// integration. The drift matrix is diagonal in the eigenbasis, so the
// implicit solves are plain reciprocals; the noise term is explicit in
// every scheme.

namespace shesim {

enum class StepScheme { ImplicitEuler, ExplicitEuler, StiffImplicitEuler };

inline const char* to_string(StepScheme s) {
    switch (s) {
        case StepScheme::ImplicitEuler: return "implicit";
        case StepScheme::ExplicitEuler: return "explicit";
        case StepScheme::StiffImplicitEuler: return "stiff-implicit";
    }
    return "?";
}

inline StepScheme parse_scheme(const std::string& s) {
    if (s == "implicit") return StepScheme::ImplicitEuler;
    if (s == "explicit") return StepScheme::ExplicitEuler;
    if (s == "stiff-implicit") return StepScheme::StiffImplicitEuler;
    throw std::invalid_argument("unknown scheme '" + s +
                                "' (expected implicit | explicit | stiff-implicit)");
}

// Paths whose squared norm passes this are cut short and marked diverged
// instead of erroring the whole ensemble; region sweeps probe unstable
// parameters on purpose.
inline constexpr double kDivergenceThreshold = 1e100;

struct Trajectory {
    double tau = 0.0;
    std::vector<double> times;    // t_n = n tau, n = 0..n_steps
    std::vector<double> norm_sq;  // ||U_n||_2^2
    std::vector<Eigen::VectorXd> states;  // filled only when keep_states
    bool diverged = false;
    long diverged_step = -1;
};

namespace detail {

// v = sum_j (A_j u) dB_j, accumulated in fixed j order for bit
// reproducibility.
inline void noise_action(const GalerkinSystem& sys, const StateVector& u,
                         const Eigen::Ref<const Eigen::VectorXd>& db, Eigen::VectorXd& v,
                         Eigen::VectorXd& tmp) {
    v.setZero(sys.n());
    for (int j = 1; j <= sys.m(); ++j) {
        const double w = db(j - 1);
        if (w == 0.0) continue;
        tmp.noalias() = sys.noise_mat(j) * u;
        v.noalias() += w * tmp;
    }
}

inline void check_implicit_denominator(const GalerkinSystem& sys, StepScheme scheme, double tau) {
    if (scheme == StepScheme::ImplicitEuler) {
        const double dmin = 1.0 + tau * sys.drift_diag.minCoeff();
        if (!(dmin > 0.0))
            throw std::runtime_error(
                "step: implicit solve ill-posed, 1 + tau*(lambda_k + beta0) <= 0 for some k");
    } else if (scheme == StepScheme::StiffImplicitEuler) {
        const double lmin = sys.drift_diag.minCoeff() - sys.spec.beta0;
        if (!(1.0 + tau * lmin > 0.0))
            throw std::runtime_error("step: stiff-implicit solve ill-posed, 1 + tau*lambda_k <= 0");
    }
}

}  // namespace detail

inline StateVector step(const GalerkinSystem& sys, StepScheme scheme, const StateVector& u,
                        const Eigen::Ref<const Eigen::VectorXd>& db, double tau) {
    if (!(tau > 0.0)) throw std::domain_error("step: tau must be positive");
    if (db.size() < sys.m()) throw std::domain_error("step: increment column shorter than M");
    if (u.size() != sys.n()) throw std::domain_error("step: state length differs from N");
    detail::check_implicit_denominator(sys, scheme, tau);

    Eigen::VectorXd v(sys.n()), tmp(sys.n());
    detail::noise_action(sys, u, db, v, tmp);
    const double beta1 = sys.spec.beta1;

    StateVector out(sys.n());
    switch (scheme) {
        case StepScheme::ImplicitEuler:
            out = (u + beta1 * v).cwiseQuotient(
                (1.0 + tau * sys.drift_diag.array()).matrix().eval());
            break;
        case StepScheme::ExplicitEuler:
            out = u - tau * sys.drift_diag.cwiseProduct(u) + beta1 * v;
            break;
        case StepScheme::StiffImplicitEuler: {
            const Eigen::ArrayXd lambda = sys.drift_diag.array() - sys.spec.beta0;
            out = (((1.0 - tau * sys.spec.beta0) * u + beta1 * v).array() / (1.0 + tau * lambda))
                      .matrix();
            break;
        }
    }
    return out;
}

inline Trajectory integrate(const GalerkinSystem& sys, StepScheme scheme, const StateVector& u0,
                            const NoiseIncrements& inc, double tau, bool keep_states = false) {
    if (inc.n_steps() < 1) throw std::domain_error("integrate: need at least one step");
    if (inc.m() < sys.m()) throw std::domain_error("integrate: increments narrower than M");

    const int n_steps = inc.n_steps();
    Trajectory traj;
    traj.tau = tau;
    traj.times.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.norm_sq.reserve(static_cast<std::size_t>(n_steps) + 1);

    StateVector u = u0;
    double nsq = u.squaredNorm();
    traj.times.push_back(0.0);
    traj.norm_sq.push_back(nsq);
    if (keep_states) traj.states.push_back(u);

    for (int n = 0; n < n_steps; ++n) {
        u = step(sys, scheme, u, inc.inc.col(n), tau);
        nsq = u.squaredNorm();
        if (!std::isfinite(nsq))
            throw std::runtime_error("integrate: non-finite state at step " + std::to_string(n + 1));
        traj.times.push_back((n + 1) * tau);
        traj.norm_sq.push_back(nsq);
        if (keep_states) traj.states.push_back(u);
        if (nsq > kDivergenceThreshold) {
            traj.diverged = true;
            traj.diverged_step = n + 1;
            break;
        }
    }
    return traj;
}

}  // namespace shesim
