#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "shesim/covariance.hpp"
#include "shesim/rng.hpp"

// Correlated Brownian increments Delta B_j^n with
// E[Delta B_i Delta B_j] = tau * alpha_ij, generated from counter-based
// per-mode substreams so that truncating modes never shifts the draws of
// the modes that remain.

namespace shesim {

struct NoisePathConfig {
    int m = 1;
    double tau = 0.0;
    int n_steps = 0;
    std::uint64_t base_seed = 0;
    std::uint64_t path_index = 0;
};

struct NoiseIncrements {
    Eigen::MatrixXd inc;  // m x n_steps; column n is the step-n increment
    NoisePathConfig config;
    bool from_diagonal = false;

    int m() const { return static_cast<int>(inc.rows()); }
    int n_steps() const { return static_cast<int>(inc.cols()); }
};

// Column n equals sqrt(tau) * L[1..m,1..m] * xi_n with xi_(j,n) drawn from
// the stream keyed by (base_seed, path_index, j, n).
inline NoiseIncrements generate_increments(const AlphaMatrix& alpha,
                                           const NoisePathConfig& config) {
    if (config.m < 1) throw std::domain_error("generate_increments: m must be >= 1");
    if (config.n_steps < 1) throw std::domain_error("generate_increments: n_steps must be >= 1");
    if (!(config.tau > 0.0)) throw std::domain_error("generate_increments: tau must be positive");
    if (alpha.dim() < config.m)
        throw std::domain_error("generate_increments: Cholesky factor smaller than m");

    const int m = config.m;
    const int n = config.n_steps;
    const double root_tau = std::sqrt(config.tau);

    NoiseIncrements out;
    out.config = config;
    out.from_diagonal = alpha.from_diagonal;
    out.inc.resize(m, n);

    Eigen::MatrixXd xi(m, n);
    for (int j = 0; j < m; ++j)
        for (int step = 0; step < n; ++step)
            xi(j, step) = rng::standard_normal(config.base_seed, config.path_index,
                                               static_cast<std::uint64_t>(j + 1),
                                               static_cast<std::uint64_t>(step));

    if (alpha.from_diagonal) {
        // Diagonal factor: scale rows, no mixing across modes.
        for (int j = 0; j < m; ++j) out.inc.row(j) = root_tau * alpha.chol(j, j) * xi.row(j);
    } else {
        out.inc.noalias() = root_tau * alpha.chol.topLeftCorner(m, m) * xi;
    }
    return out;
}

// First m_coarse rows; exact truncation of the fine path. Only meaningful
// for diagonal alpha, where the coarse law is preserved row by row.
inline NoiseIncrements restrict_increments(const NoiseIncrements& inc, int m_coarse) {
    if (m_coarse < 1) throw std::domain_error("restrict_increments: m_coarse must be >= 1");
    if (m_coarse > inc.m())
        throw std::domain_error("restrict_increments: m_coarse exceeds stored noise dimension");
    if (!inc.from_diagonal)
        throw std::invalid_argument(
            "restrict_increments: increments came from a non-diagonal alpha; restriction would "
            "not preserve the coarse law");
    NoiseIncrements out;
    out.inc = inc.inc.topRows(m_coarse);
    out.config = inc.config;
    out.config.m = m_coarse;
    out.from_diagonal = true;
    return out;
}

}  // namespace shesim
