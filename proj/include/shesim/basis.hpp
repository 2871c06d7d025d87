#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "shesim/quadrature.hpp"

// Eigenpairs of -d^2/dx^2 on [0,1] with Dirichlet boundary, and the triple
// products a_jki = <e_i e_j, e_k> coupling noise modes to solution modes.
// Basis normalization is e_k(x) = sqrt(2) sin(k pi x), the one that is
// orthonormal on [0,1].

namespace shesim {

inline constexpr double kPi = 3.14159265358979323846;

struct BasisSpec {
    // Dimension 1, domain [0,1], Dirichlet boundary; only the largest mode
    // index ever requested is configurable.
    int n_max = 1;
};

inline double eigenvalue(int k) {
    if (k < 1) throw std::domain_error("eigenvalue: mode index must be >= 1");
    return static_cast<double>(k) * static_cast<double>(k) * kPi * kPi;
}

inline double eval_eigenfunction(int k, double x) {
    if (k < 1) throw std::domain_error("eval_eigenfunction: mode index must be >= 1");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("eval_eigenfunction: x must lie in [0,1]");
    return std::sqrt(2.0) * std::sin(k * kPi * x);
}

// Closed form of int_0^1 e_i e_j e_k dx. Zero when i+j+k is even; otherwise
// the indices are sorted so every permutation runs through identical
// arithmetic and the results compare bit-equal.
inline double triple_product(int i, int j, int k) {
    if (i < 1 || j < 1 || k < 1)
        throw std::domain_error("triple_product: indices must be >= 1");
    if ((i + j + k) % 2 == 0) return 0.0;
    int a = i, b = j, c = k;
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    const double cc = static_cast<double>(c) * c;
    const double dm = static_cast<double>(a - b) * (a - b);
    const double dp = static_cast<double>(a + b) * (a + b);
    return 2.0 * std::sqrt(2.0) * c / kPi * (1.0 / (cc - dm) - 1.0 / (cc - dp));
}

// Independent quadrature route for the same integral; test oracle for the
// closed form above, kept free of any shared arithmetic with it.
inline double triple_product_quadrature(int i, int j, int k, int nodes) {
    if (i < 1 || j < 1 || k < 1)
        throw std::domain_error("triple_product_quadrature: indices must be >= 1");
    if (nodes < 100)
        throw std::domain_error("triple_product_quadrature: need >= 100 nodes");
    return quad::integrate01(
        [&](double x) {
            return eval_eigenfunction(i, x) * eval_eigenfunction(j, x) *
                   eval_eigenfunction(k, x);
        },
        nodes);
}

// Sparse symmetric tensor a_jki for 1 <= k,i <= N (solution modes) and
// 1 <= j <= M (noise modes). Entries are stored once per sorted index
// triple; permutation symmetry is applied on lookup, and even-parity
// triples are never stored.
class TripleProductTensor {
  public:
    TripleProductTensor() = default;

    TripleProductTensor(int n_solution, int n_noise)
        : n_solution_(n_solution), n_noise_(n_noise) {
        if (n_solution < 1 || n_noise < 1)
            throw std::domain_error("TripleProductTensor: N and M must be >= 1");
        const int top = std::max(n_solution, n_noise);
        for (int a = 1; a <= top; ++a)
            for (int b = a; b <= top; ++b)
                for (int c = b; c <= top; ++c) {
                    if ((a + b + c) % 2 == 0) continue;
                    if (!covers(a, b, c)) continue;
                    entries_.emplace(pack(a, b, c), triple_product(a, b, c));
                }
    }

    int n_solution() const { return n_solution_; }
    int n_noise() const { return n_noise_; }

    // a_jki with symmetry applied; zero for even parity.
    double value(int j, int k, int i) const {
        if (j < 1 || k < 1 || i < 1)
            throw std::domain_error("TripleProductTensor::value: indices must be >= 1");
        if (j > n_noise_ || k > n_solution_ || i > n_solution_)
            throw std::out_of_range("TripleProductTensor::value: index outside tensor range");
        if ((i + j + k) % 2 == 0) return 0.0;
        int a = i, b = j, c = k;
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        return entries_.at(pack(a, b, c));
    }

    // Number of distinct sorted triples held in memory.
    std::size_t stored_size() const { return entries_.size(); }

    // Visits every nonzero (j,k,i) in range, j-major lexicographic order.
    template <typename F>
    void for_each_nonzero(F&& f) const {
        for (int j = 1; j <= n_noise_; ++j)
            for (int k = 1; k <= n_solution_; ++k)
                for (int i = 1; i <= n_solution_; ++i) {
                    if ((i + j + k) % 2 == 0) continue;
                    f(j, k, i, value(j, k, i));
                }
    }

    std::size_t nonzero_count() const {
        std::size_t n = 0;
        for_each_nonzero([&](int, int, int, double) { ++n; });
        return n;
    }

  private:
    static std::uint64_t pack(int a, int b, int c) {
        return (static_cast<std::uint64_t>(a) << 42) |
               (static_cast<std::uint64_t>(b) << 21) | static_cast<std::uint64_t>(c);
    }

    // True when some permutation of the sorted triple (a<=b<=c) fits the
    // (j <= M, k,i <= N) index box.
    bool covers(int a, int b, int c) const {
        // Try each of a, b, c in the noise slot; the other two must fit N.
        if (a <= n_noise_ && b <= n_solution_ && c <= n_solution_) return true;
        if (b <= n_noise_ && a <= n_solution_ && c <= n_solution_) return true;
        if (c <= n_noise_ && a <= n_solution_ && b <= n_solution_) return true;
        return false;
    }

    int n_solution_ = 0;
    int n_noise_ = 0;
    std::unordered_map<std::uint64_t, double> entries_;
};

inline TripleProductTensor build_tensor(int n_solution, int n_noise) {
    return TripleProductTensor(n_solution, n_noise);
}

}  // namespace shesim
