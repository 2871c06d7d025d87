#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace shesim::stats {

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

inline OlsFit ols(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n != ys.size()) throw std::invalid_argument("ols: size mismatch");
    if (n < 2) throw std::invalid_argument("ols: need at least two points");
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx == 0.0) throw std::invalid_argument("ols: degenerate abscissae");
    OlsFit fit;
    fit.points = n;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - fit.intercept - fit.slope * xs[i];
        rss += r * r;
    }
    fit.slope_stderr = n > 2 ? std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
    return fit;
}

struct MeanCi {
    double mean = 0.0;
    double ci_halfwidth = 0.0;  // 95%, normal approximation
};

inline MeanCi mean_ci(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n == 0) throw std::invalid_argument("mean_ci: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    MeanCi out;
    out.mean = s / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        const double var = ss / (static_cast<double>(n) - 1.0);
        out.ci_halfwidth = 1.959963984540054 * std::sqrt(var / static_cast<double>(n));
    }
    return out;
}

}  // namespace shesim::stats
