#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "shesim/basis.hpp"
#include "shesim/covariance.hpp"
#include "shesim/quadrature.hpp"

// Assembly of the doubly-truncated coefficient SDE
//   dU = -(Lambda^N + B^N) U dt + beta1 sum_{j<=M} A_j^N U dB_j
// and coefficient-space utilities (projection, reconstruction, norms).

namespace shesim {

using StateVector = Eigen::VectorXd;

struct SystemSpec {
    int n = 1;             // solution truncation N
    int m = 1;             // noise truncation M
    double beta0 = 0.0;    // damping; positive is stabilizing
    double beta1 = 0.0;    // noise coupling
    double drift_scale = 1.0;  // multiplies the Laplacian eigenvalues
    CovarianceModel covariance = CovarianceModel::power_law(2.0, 1);

    BasisSpec basis() const { return BasisSpec{std::max(n, m)}; }

    void validate() const {
        if (n < 1 || m < 1) throw std::domain_error("SystemSpec: N and M must be >= 1");
        if (!(drift_scale > 0.0))
            throw std::domain_error("SystemSpec: drift_scale must be positive");
    }
};

struct GalerkinSystem {
    SystemSpec spec;
    Eigen::VectorXd drift_diag;  // drift_scale * lambda_k + beta0, k = 1..N
    std::shared_ptr<const std::vector<Eigen::MatrixXd>> noise_mats;  // A_j^N, j = 1..M
    AlphaMatrix alpha;

    int n() const { return spec.n; }
    int m() const { return spec.m; }
    const Eigen::MatrixXd& noise_mat(int j) const {
        return (*noise_mats)[static_cast<std::size_t>(j - 1)];
    }
};

inline GalerkinSystem assemble(const SystemSpec& spec) {
    spec.validate();
    GalerkinSystem sys;
    sys.spec = spec;
    sys.drift_diag.resize(spec.n);
    for (int k = 1; k <= spec.n; ++k)
        sys.drift_diag(k - 1) = spec.drift_scale * eigenvalue(k) + spec.beta0;

    const TripleProductTensor tensor(spec.n, spec.m);
    auto mats = std::make_shared<std::vector<Eigen::MatrixXd>>();
    mats->reserve(static_cast<std::size_t>(spec.m));
    for (int j = 1; j <= spec.m; ++j) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(spec.n, spec.n);
        for (int k = 1; k <= spec.n; ++k)
            for (int i = 1; i <= spec.n; ++i)
                if ((i + j + k) % 2 != 0) a(k - 1, i - 1) = tensor.value(j, k, i);
        mats->push_back(std::move(a));
    }
    sys.noise_mats = std::move(mats);
    sys.alpha = alpha_matrix(spec.covariance, spec.m);
    return sys;
}

// Same tensors and alpha, new damping / coupling. Cheap enough for
// per-cell use in region sweeps.
inline GalerkinSystem with_betas(const GalerkinSystem& base, double beta0, double beta1) {
    GalerkinSystem sys = base;
    sys.spec.beta0 = beta0;
    sys.spec.beta1 = beta1;
    for (int k = 1; k <= sys.spec.n; ++k)
        sys.drift_diag(k - 1) = sys.spec.drift_scale * eigenvalue(k) + beta0;
    return sys;
}

// u_k = int_0^1 u0(x) e_k(x) dx by fixed-resolution composite quadrature.
inline StateVector project_initial(const std::function<double(double)>& u0, int n,
                                   int quad_nodes = 4096) {
    if (n < 1) throw std::domain_error("project_initial: N must be >= 1");
    const quad::Rule rule = quad::composite01(quad_nodes);
    StateVector u = StateVector::Zero(n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double x = rule.nodes[q];
        const double wf = rule.weights[q] * u0(x);
        for (int k = 1; k <= n; ++k) u(k - 1) += wf * eval_eigenfunction(k, x);
    }
    return u;
}

// Pass-through for coefficient lists: truncate or zero-pad to length N.
inline StateVector project_initial(const std::vector<double>& coeffs, int n) {
    if (n < 1) throw std::domain_error("project_initial: N must be >= 1");
    StateVector u = StateVector::Zero(n);
    const int take = std::min<int>(n, static_cast<int>(coeffs.size()));
    for (int k = 0; k < take; ++k) u(k) = coeffs[static_cast<std::size_t>(k)];
    return u;
}

inline std::vector<double> reconstruct(const StateVector& state, const std::vector<double>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        if (!(x >= 0.0 && x <= 1.0))
            throw std::domain_error("reconstruct: x must lie in [0,1]");
        double s = 0.0;
        for (int k = 1; k <= state.size(); ++k) s += state(k - 1) * eval_eigenfunction(k, x);
        out.push_back(s);
    }
    return out;
}

inline double l2_norm_sq(const StateVector& state) { return state.squaredNorm(); }

}  // namespace shesim
