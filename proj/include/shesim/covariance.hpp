#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shesim/basis.hpp"
#include "shesim/quadrature.hpp"

// Noise covariance models q(x,y), their basis coefficients
// alpha_ij = int int q(x,y) e_i(x) e_j(y) dx dy, the Cholesky factor used
// for sampling, and the stability scalars kappa, kappa_tilde2, rho(M).

namespace shesim {

class CovarianceModel {
  public:
    enum class Kind { Diagonal, Kernel };
    enum class KernelFamily { FbmField, FractionalGaussian };

    // q(x,y) = sum_j q_j e_j(x) e_j(y) with q_j = j^-exponent, j <= count.
    static CovarianceModel power_law(double exponent, int count) {
        if (!(exponent > 1.0))
            throw std::domain_error("power_law: exponent must exceed 1 (summable weights)");
        if (count < 1) throw std::domain_error("power_law: count must be >= 1");
        std::vector<double> w(static_cast<std::size_t>(count));
        for (int j = 1; j <= count; ++j)
            w[static_cast<std::size_t>(j - 1)] = std::pow(static_cast<double>(j), -exponent);
        return from_weights(std::move(w));
    }

    static CovarianceModel from_weights(std::vector<double> weights) {
        if (weights.empty()) throw std::domain_error("from_weights: empty weight list");
        for (double w : weights)
            if (!(w >= 0.0)) throw std::domain_error("from_weights: weights must be nonnegative");
        CovarianceModel m;
        m.kind_ = Kind::Diagonal;
        m.weights_ = std::move(weights);
        return m;
    }

    // Fractional Brownian field q(x,y) = x^{2H} + y^{2H} - |x-y|^{2H};
    // bounded diagonal, kappa finite.
    static CovarianceModel fbm_field(double hurst, int quad_nodes = 256) {
        CovarianceModel m = kernel_common(hurst, quad_nodes);
        m.family_ = KernelFamily::FbmField;
        return m;
    }

    // Fractional Gaussian kernel q(x,y) = |x-y|^{2H-2}: singular on the
    // diagonal, kappa = infinity. Exists so the stability checker can
    // report "condition inapplicable"; its alpha matrix is a regularized
    // quadrature estimate.
    static CovarianceModel fractional_gaussian(double hurst, int quad_nodes = 256) {
        if (!(hurst > 0.5))
            throw std::domain_error("fractional_gaussian: need H > 1/2 for an integrable kernel");
        CovarianceModel m = kernel_common(hurst, quad_nodes);
        m.family_ = KernelFamily::FractionalGaussian;
        return m;
    }

    Kind kind() const { return kind_; }
    bool is_diagonal() const { return kind_ == Kind::Diagonal; }
    KernelFamily family() const { return family_; }
    double hurst() const { return hurst_; }
    int quad_nodes() const { return quad_nodes_; }

    // q_j; zero beyond the stored list.
    double weight(int j) const {
        if (j < 1) throw std::domain_error("weight: mode index must be >= 1");
        const auto idx = static_cast<std::size_t>(j - 1);
        return idx < weights_.size() ? weights_[idx] : 0.0;
    }

    const std::vector<double>& weights() const { return weights_; }

    // Sum of the diagonal spectral weights, the quantity Example-5.1-style
    // conditions use; NaN for kernel models where it is not defined.
    double sum_weights() const {
        if (!is_diagonal()) return std::numeric_limits<double>::quiet_NaN();
        double s = 0.0;
        for (double w : weights_) s += w;
        return s;
    }

    bool kappa_finite() const { return family_ != KernelFamily::FractionalGaussian; }

    double kernel(double x, double y) const {
        switch (family_) {
            case KernelFamily::FbmField:
                return std::pow(std::abs(x), 2.0 * hurst_) + std::pow(std::abs(y), 2.0 * hurst_) -
                       std::pow(std::abs(x - y), 2.0 * hurst_);
            case KernelFamily::FractionalGaussian:
                return std::pow(std::abs(x - y), 2.0 * hurst_ - 2.0);
        }
        return 0.0;
    }

    // q(x,x), evaluated analytically per model.
    double diagonal_value(double x) const {
        if (is_diagonal()) {
            double s = 0.0;
            for (std::size_t j = 0; j < weights_.size(); ++j) {
                const double e = std::sin(static_cast<double>(j + 1) * kPi * x);
                s += weights_[j] * 2.0 * e * e;
            }
            return s;
        }
        if (family_ == KernelFamily::FractionalGaussian)
            return std::numeric_limits<double>::infinity();
        return 2.0 * std::pow(std::abs(x), 2.0 * hurst_);
    }

  private:
    static CovarianceModel kernel_common(double hurst, int quad_nodes) {
        if (!(hurst > 0.0 && hurst < 1.0))
            throw std::domain_error("kernel model: Hurst parameter must lie in (0,1)");
        if (quad_nodes < 16) throw std::domain_error("kernel model: need >= 16 quadrature nodes");
        CovarianceModel m;
        m.kind_ = Kind::Kernel;
        m.hurst_ = hurst;
        m.quad_nodes_ = quad_nodes;
        return m;
    }

    Kind kind_ = Kind::Diagonal;
    KernelFamily family_ = KernelFamily::FbmField;
    std::vector<double> weights_;
    double hurst_ = 0.5;
    int quad_nodes_ = 256;
};

struct AlphaMatrix {
    Eigen::MatrixXd alpha;  // M x M, symmetric
    Eigen::MatrixXd chol;   // lower triangular L with L L^T = alpha + jitter I
    double jitter = 0.0;
    bool from_diagonal = false;
    int dim() const { return static_cast<int>(alpha.rows()); }
};

namespace detail {

// alpha block for basis indices [i_lo, i_hi] of a kernel model, by
// tensor-product Gauss-Legendre quadrature. The fractional-Gaussian kernel
// blows up on the grid diagonal, so its two axes use rules of different
// order (nodes never coincide) and the result is symmetrized.
inline Eigen::MatrixXd kernel_alpha_block(const CovarianceModel& model, int i_lo, int i_hi,
                                          int nodes_per_axis) {
    const bool singular = model.family() == CovarianceModel::KernelFamily::FractionalGaussian;
    const quad::Rule rx = quad::gauss_legendre01(nodes_per_axis);
    const quad::Rule ry = quad::gauss_legendre01(singular ? nodes_per_axis + 1 : nodes_per_axis);
    const int nx = static_cast<int>(rx.size());
    const int ny = static_cast<int>(ry.size());
    const int m = i_hi - i_lo + 1;

    // Weighted kernel on the grid, then a sandwich with the basis values:
    // alpha = Ex^T (W Q W) Ey.
    Eigen::MatrixXd q(nx, ny);
    for (int a = 0; a < nx; ++a)
        for (int b = 0; b < ny; ++b)
            q(a, b) = rx.weights[static_cast<std::size_t>(a)] *
                      ry.weights[static_cast<std::size_t>(b)] *
                      model.kernel(rx.nodes[static_cast<std::size_t>(a)],
                                   ry.nodes[static_cast<std::size_t>(b)]);

    Eigen::MatrixXd ex(nx, m), ey(ny, m);
    for (int c = 0; c < m; ++c) {
        const int mode = i_lo + c;
        for (int a = 0; a < nx; ++a)
            ex(a, c) = eval_eigenfunction(mode, rx.nodes[static_cast<std::size_t>(a)]);
        for (int b = 0; b < ny; ++b)
            ey(b, c) = eval_eigenfunction(mode, ry.nodes[static_cast<std::size_t>(b)]);
    }
    Eigen::MatrixXd alpha = ex.transpose() * q * ey;
    return 0.5 * (alpha + alpha.transpose());
}

inline Eigen::MatrixXd alpha_block(const CovarianceModel& model, int i_lo, int i_hi) {
    if (model.is_diagonal()) {
        const int m = i_hi - i_lo + 1;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
        for (int c = 0; c < m; ++c) a(c, c) = model.weight(i_lo + c);
        return a;
    }
    return kernel_alpha_block(model, i_lo, i_hi, model.quad_nodes());
}

}  // namespace detail

// Lower-triangular L with L L^T = a + jitter I, trying the smallest jitter
// in {0, 1e-12, 1e-10, 1e-8} that makes the factorization succeed.
// Exactly diagonal input takes the exact square-root path (zero diagonal
// entries allowed, jitter 0).
inline Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& a, double& jitter_used) {
    const int m = static_cast<int>(a.rows());
    if (a.isDiagonal(0.0)) {
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            if (a(i, i) < 0.0)
                throw std::runtime_error("cholesky_factor: negative diagonal entry at index " +
                                         std::to_string(i + 1));
            l(i, i) = std::sqrt(a(i, i));
        }
        jitter_used = 0.0;
        return l;
    }
    for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
        Eigen::MatrixXd shifted = a + jitter * Eigen::MatrixXd::Identity(m, m);
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            jitter_used = jitter;
            return llt.matrixL();
        }
    }
    // Name the offending leading minor: smallest k whose leading block fails.
    for (int k = 1; k <= m; ++k) {
        Eigen::LLT<Eigen::MatrixXd> llt(
            (a + 1e-8 * Eigen::MatrixXd::Identity(m, m)).topLeftCorner(k, k).eval());
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("cholesky_factor: factorization failed at leading minor " +
                                     std::to_string(k) + " even with maximal jitter 1e-8");
    }
    throw std::runtime_error("cholesky_factor: factorization failed at maximal jitter 1e-8");
}

// alpha_ij for 1 <= i,j <= M plus its sampling factor. Kernel-built
// matrices are PSD-checked to a relative tolerance of 1e-8 before the
// jitter ladder runs.
inline AlphaMatrix alpha_matrix(const CovarianceModel& model, int m) {
    if (m < 1) throw std::domain_error("alpha_matrix: M must be >= 1");
    AlphaMatrix out;
    out.alpha = detail::alpha_block(model, 1, m);
    out.from_diagonal = model.is_diagonal();
    if (!model.is_diagonal()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.alpha, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        const double tol = 1e-8 * std::max(hi, 1e-300);
        if (lo < -tol) {
            std::ostringstream msg;
            msg << "alpha_matrix: quadrature-built matrix is not PSD; most negative eigenvalue "
                << lo;
            throw std::runtime_error(msg.str());
        }
    }
    out.chol = cholesky_factor(out.alpha, out.jitter);
    return out;
}

// kappa = sup_x q(x,x): max over a uniform grid in (0,1) plus one local
// refinement pass around the grid argmax. Infinite for models with a
// singular diagonal.
inline double kappa(const CovarianceModel& model, int grid_n = 10000) {
    if (grid_n < 100) throw std::domain_error("kappa: grid_n must be >= 100");
    if (!model.kappa_finite()) return std::numeric_limits<double>::infinity();
    const double h = 1.0 / (grid_n + 1);
    double best = -std::numeric_limits<double>::infinity();
    double best_x = 0.5;
    for (int i = 1; i <= grid_n; ++i) {
        const double x = i * h;
        const double v = model.diagonal_value(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    const double lo = std::max(best_x - h, std::numeric_limits<double>::min());
    const double hi = std::min(best_x + h, 1.0 - std::numeric_limits<double>::epsilon());
    constexpr int refine = 200;
    for (int i = 0; i <= refine; ++i) {
        const double x = lo + (hi - lo) * i / refine;
        best = std::max(best, model.diagonal_value(x));
    }
    return best;
}

// kappa_tilde2: top eigenvalue of the noise Gram matrix
// G = sum_{i,j<=M} alpha_ij (A_i^N)^T A_j^N, the constant the truncated
// stability condition uses.
inline double kappa_tilde2(const AlphaMatrix& alpha, const TripleProductTensor& tensor, int n,
                           int m) {
    if (n < 1 || m < 1) throw std::domain_error("kappa_tilde2: N and M must be >= 1");
    if (tensor.n_solution() < n || tensor.n_noise() < m)
        throw std::domain_error("kappa_tilde2: tensor does not cover the requested (N, M)");
    if (alpha.dim() < m)
        throw std::domain_error("kappa_tilde2: alpha dimension below M");

    std::vector<Eigen::MatrixXd> a_mats(static_cast<std::size_t>(m));
    for (int j = 1; j <= m; ++j) {
        Eigen::MatrixXd& a = a_mats[static_cast<std::size_t>(j - 1)];
        a.setZero(n, n);
        for (int k = 1; k <= n; ++k)
            for (int i = 1; i <= n; ++i)
                if ((i + j + k) % 2 != 0) a(k - 1, i - 1) = tensor.value(j, k, i);
    }

    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    if (alpha.from_diagonal) {
        for (int j = 0; j < m; ++j) {
            const double w = alpha.alpha(j, j);
            if (w == 0.0) continue;
            const auto& a = a_mats[static_cast<std::size_t>(j)];
            g.noalias() += w * a.transpose() * a;
        }
    } else {
        Eigen::MatrixXd t(n, n);
        for (int i = 0; i < m; ++i) {
            t.setZero();
            for (int j = 0; j < m; ++j) {
                const double w = alpha.alpha(i, j);
                if (w == 0.0) continue;
                t.noalias() += w * a_mats[static_cast<std::size_t>(j)];
            }
            g.noalias() += a_mats[static_cast<std::size_t>(i)].transpose() * t;
        }
    }
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

// kappa_tilde1 has no finite algorithm; approximate it through the large-M
// limit of kappa_tilde2 with M_large = 4 max(N, M).
inline double kappa_tilde1_approx(const CovarianceModel& model, int n, int m) {
    const int m_large = 4 * std::max(n, m);
    const TripleProductTensor tensor(n, m_large);
    const AlphaMatrix alpha = alpha_matrix(model, m_large);
    return kappa_tilde2(alpha, tensor, n, m_large);
}

// rho(M): spectral norm of the covariance tail block over basis indices
// [M, tail_cap]. Exactly q_M for diagonal models with monotone weights.
inline double rho(const CovarianceModel& model, int m, int tail_cap) {
    if (m < 1) throw std::domain_error("rho: M must be >= 1");
    if (tail_cap <= m) throw std::domain_error("rho: tail_cap must exceed M");
    if (model.is_diagonal()) {
        double best = 0.0;
        for (int j = m; j <= tail_cap; ++j) best = std::max(best, model.weight(j));
        return best;
    }
    const Eigen::MatrixXd tail = detail::alpha_block(model, m, tail_cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tail, Eigen::EigenvaluesOnly);
    return std::max({es.eigenvalues().maxCoeff(), -es.eigenvalues().minCoeff(), 0.0});
}

}  // namespace shesim
