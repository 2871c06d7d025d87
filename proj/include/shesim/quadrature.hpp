#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace shesim::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule of order n on [-1,1], nodes by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
    if (n < 1) throw std::domain_error("gauss_legendre: order must be >= 1");
    constexpr double pi = 3.14159265358979323846;
    Rule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // Legendre recurrence for P_n(x) and P_n'(x).
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[static_cast<std::size_t>(i)] = -x;
        r.weights[static_cast<std::size_t>(i)] = w;
        r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return r;
}

// Same rule mapped to [0,1].
inline Rule gauss_legendre01(int n) {
    Rule r = gauss_legendre(n);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.nodes[i] = 0.5 * (r.nodes[i] + 1.0);
        r.weights[i] *= 0.5;
    }
    return r;
}

// Composite rule on [0,1]: 10-point Gauss-Legendre per panel, at least
// `total_nodes` evaluations overall.
inline Rule composite01(int total_nodes) {
    if (total_nodes < 1) throw std::domain_error("composite01: need >= 1 node");
    constexpr int pts = 10;
    const int panels = (total_nodes + pts - 1) / pts;
    static const Rule base = gauss_legendre(pts);
    Rule r;
    r.nodes.reserve(static_cast<std::size_t>(panels) * pts);
    r.weights.reserve(static_cast<std::size_t>(panels) * pts);
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = p * h;
        for (int i = 0; i < pts; ++i) {
            r.nodes.push_back(a + 0.5 * h * (base.nodes[static_cast<std::size_t>(i)] + 1.0));
            r.weights.push_back(0.5 * h * base.weights[static_cast<std::size_t>(i)]);
        }
    }
    return r;
}

template <typename F>
double integrate01(const F& f, int total_nodes) {
    const Rule r = composite01(total_nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
}

}  // namespace shesim::quad
