#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "shesim/montecarlo.hpp"
#include "shesim/stability.hpp"

using namespace shesim;
using Catch::Approx;

namespace {

SystemSpec scalar_spec(double beta0, double beta1) {
    SystemSpec s;
    s.n = 1;
    s.m = 1;
    s.beta0 = beta0;
    s.beta1 = beta1;
    s.covariance = CovarianceModel::from_weights({1.0});
    return s;
}

EnsembleConfig ensemble(int paths, double tau, int steps, std::uint64_t seed,
                        StepScheme scheme = StepScheme::ImplicitEuler) {
    EnsembleConfig c;
    c.paths = paths;
    c.tau = tau;
    c.n_steps = steps;
    c.base_seed = seed;
    c.scheme = scheme;
    return c;
}

// Fitted decay rate and a batch-means standard error: paths are split into
// `groups` disjoint ensembles, each fit separately.
struct GroupRate {
    double rate;
    double se;
};

GroupRate group_rate(const GalerkinSystem& sys, const StateVector& u0, int paths_per_group,
                     int groups, double tau, int steps, std::uint64_t seed) {
    std::vector<double> rates;
    for (int g = 0; g < groups; ++g) {
        const MeanSquareCurve curve = mean_square_curve(
            sys, ensemble(paths_per_group, tau, steps, seed + static_cast<std::uint64_t>(g) * 7919),
            u0);
        rates.push_back(decay_rate_fit(curve, 0.5).rate);
    }
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= static_cast<double>(groups);
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    var /= static_cast<double>(groups - 1);
    return {mean, std::sqrt(var / groups)};
}

}  // namespace

TEST_CASE("deterministic ensembles have zero-width confidence bands") {
    const GalerkinSystem sys = assemble(scalar_spec(0.0, 0.0));
    StateVector u0(1);
    u0 << 1.0;
    const MeanSquareCurve curve = mean_square_curve(sys, ensemble(16, 0.01, 50, 4), u0);
    for (double w : curve.ci_halfwidth) CHECK(w == 0.0);
    CHECK(curve.diverged_count == 0);
    // Single-path ensembles are allowed and also report zero width.
    const MeanSquareCurve one = mean_square_curve(sys, ensemble(1, 0.01, 50, 4), u0);
    CHECK(one.mean_sq == curve.mean_sq);
    for (double w : one.ci_halfwidth) CHECK(w == 0.0);
}

TEST_CASE("scalar per-step mean-square ratio matches the amplification factor") {
    const double tau = 0.01;
    const GalerkinSystem sys = assemble(scalar_spec(0.0, 1.0));
    StateVector u0(1);
    u0 << 1.0;
    const double a = triple_product(1, 1, 1);
    const double ratio_exact = (1.0 + tau * a * a) / std::pow(1.0 + tau * kPi * kPi, 2);
    const double rate_exact = std::log(ratio_exact) / tau;

    const GroupRate fit = group_rate(sys, u0, 500, 20, tau, 100, 2025);
    CHECK(std::abs(fit.rate - rate_exact) < 3.0 * fit.se);
    CHECK(std::exp(fit.rate * tau) == Approx(ratio_exact).margin(3.0 * fit.se * tau));
}

TEST_CASE("GBM oracle: fitted rate approaches the continuum exponent as tau shrinks") {
    // Scalar system: exact mean-square exponent -2 pi^2 + a111^2.
    const GalerkinSystem sys = assemble(scalar_spec(0.0, 1.0));
    StateVector u0(1);
    u0 << 1.0;
    const double a = triple_product(1, 1, 1);
    const double target = -2.0 * kPi * kPi + a * a;

    double prev_gap = 1e9;
    for (double tau : {4e-3, 2e-3, 1e-3}) {
        const int steps = static_cast<int>(std::llround(1.0 / tau));
        const double discrete =
            std::log((1.0 + tau * a * a) / std::pow(1.0 + tau * kPi * kPi, 2)) / tau;
        const GroupRate fit = group_rate(sys, u0, 250, 8, tau, steps, 77);
        CHECK(std::abs(fit.rate - discrete) < 4.0 * fit.se);
        const double gap = std::abs(discrete - target);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("confidence intervals cover the exact scalar second moment") {
    const double tau = 0.01;
    const int steps = 20;
    const GalerkinSystem sys = assemble(scalar_spec(0.0, 1.0));
    StateVector u0(1);
    u0 << 1.0;
    const double a = triple_product(1, 1, 1);
    const double ratio = (1.0 + tau * a * a) / std::pow(1.0 + tau * kPi * kPi, 2);

    int covered = 0, total = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const MeanSquareCurve curve = mean_square_curve(
            sys, ensemble(200, tau, steps, 5000 + static_cast<std::uint64_t>(rep)), u0);
        double truth = 1.0;
        for (int n = 1; n <= steps; ++n) {
            truth *= ratio;
            ++total;
            if (std::abs(curve.mean_sq[static_cast<std::size_t>(n)] - truth) <=
                curve.ci_halfwidth[static_cast<std::size_t>(n)])
                ++covered;
        }
    }
    CHECK(static_cast<double>(covered) / total >= 0.90);
}

TEST_CASE("mean-square curve respects the exact-condition envelope") {
    SystemSpec spec;
    spec.n = 6;
    spec.m = 6;
    spec.beta0 = 1.0;
    spec.beta1 = 1.0;
    spec.covariance = CovarianceModel::power_law(1.001, 50);
    const GalerkinSystem sys = assemble(spec);
    const StateVector u0 = project_initial([](double x) { return x * (1.0 - x); }, 6);

    const double k = kappa(spec.covariance);
    const double margin = 2.0 * (kPi * kPi + 1.0) - k;
    REQUIRE(margin > 0.0);

    const MeanSquareCurve curve = mean_square_curve(sys, ensemble(500, 2e-3, 500, 99), u0);
    const double initial = curve.mean_sq.front();
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
        const double envelope = std::exp(-margin * curve.t[i]) * initial;
        const double rel_ci =
            curve.mean_sq[i] > 0.0 ? curve.ci_halfwidth[i] / curve.mean_sq[i] : 0.0;
        CHECK(curve.mean_sq[i] <= envelope * (1.0 + 5.0 * rel_ci) + 1e-300);
    }
    // Decreases to a small fraction of the initial value over t in [0,1].
    CHECK(curve.mean_sq.back() < 0.05 * initial);
}

TEST_CASE("decay rate fit on synthetic exponential data") {
    MeanSquareCurve curve;
    curve.tau = 0.01;
    for (int n = 0; n <= 200; ++n) {
        const double t = 0.01 * n;
        curve.t.push_back(t);
        curve.mean_sq.push_back(std::exp(-3.0 * t));
        curve.ci_halfwidth.push_back(0.0);
    }
    const RateFit fit = decay_rate_fit(curve, 0.5);
    CHECK(fit.rate == Approx(-3.0).margin(1e-10));
    CHECK(fit.stderr_ == Approx(0.0).margin(1e-10));

    // Nonpositive values in the window are rejected.
    curve.mean_sq[150] = 0.0;
    CHECK_THROWS_AS(decay_rate_fit(curve, 0.5), std::runtime_error);

    MeanSquareCurve tiny;
    tiny.tau = 0.01;
    for (int n = 0; n <= 8; ++n) {
        tiny.t.push_back(0.01 * n);
        tiny.mean_sq.push_back(1.0);
        tiny.ci_halfwidth.push_back(0.0);
    }
    CHECK_THROWS_AS(decay_rate_fit(tiny, 1.0), std::runtime_error);
}

TEST_CASE("decay rate is monotone in drift strength and noise amplitude") {
    // Half-Laplacian scaling nu/2 with beta1 = sqrt(lambda); rates move
    // with the parameters in the directions the scalar exponent
    // -nu lambda_1 + lambda * (coupling) dictates. Ladder points share
    // seeds, so the comparisons are paired: per-group rate differences
    // must clear twice their own standard error.
    auto group_rates = [&](double nu, double lambda) {
        SystemSpec s;
        s.n = 6;
        s.m = 6;
        s.beta0 = 0.0;
        s.beta1 = std::sqrt(lambda);
        s.drift_scale = 0.5 * nu;
        s.covariance = CovarianceModel::power_law(1.001, 10);
        const GalerkinSystem sys = assemble(s);
        const StateVector u0 = project_initial([](double x) { return x * (1.0 - x); }, 6);
        std::vector<double> rates;
        for (int g = 0; g < 8; ++g) {
            const MeanSquareCurve curve = mean_square_curve(
                sys, ensemble(250, 0.004, 150, 31415 + static_cast<std::uint64_t>(g) * 7919), u0);
            rates.push_back(decay_rate_fit(curve, 0.5).rate);
        }
        return rates;
    };
    auto paired_gap = [](const std::vector<double>& a, const std::vector<double>& b) {
        // mean and SE of b - a over paired groups
        std::vector<double> d;
        for (std::size_t i = 0; i < a.size(); ++i) d.push_back(b[i] - a[i]);
        double mean = 0.0;
        for (double x : d) mean += x;
        mean /= static_cast<double>(d.size());
        double var = 0.0;
        for (double x : d) var += (x - mean) * (x - mean);
        var /= static_cast<double>(d.size() - 1);
        return std::pair{mean, std::sqrt(var / static_cast<double>(d.size()))};
    };

    const auto nu1 = group_rates(1.0, 0.25);
    const auto nu2 = group_rates(2.0, 0.25);
    const auto nu4 = group_rates(4.0, 0.25);
    const auto [dn12, sn12] = paired_gap(nu1, nu2);
    const auto [dn24, sn24] = paired_gap(nu2, nu4);
    CHECK(dn12 < -2.0 * sn12);  // more diffusion, faster decay
    CHECK(dn24 < -2.0 * sn24);

    const auto lam1 = group_rates(2.0, 0.125);
    const auto lam2 = group_rates(2.0, 0.5);
    const auto lam3 = group_rates(2.0, 2.0);
    const auto [dl12, sl12] = paired_gap(lam1, lam2);
    const auto [dl23, sl23] = paired_gap(lam2, lam3);
    CHECK(dl12 > 2.0 * sl12);  // stronger noise, slower mean-square decay
    CHECK(dl23 > 2.0 * sl23);
}

TEST_CASE("diverged paths are excluded and counted; full divergence errors") {
    // Explicit Euler far past the deterministic barrier diverges every path.
    const GalerkinSystem sys = assemble(scalar_spec(0.0, 0.0));
    StateVector u0(1);
    u0 << 1.0;
    CHECK_THROWS_AS(
        mean_square_curve(sys, ensemble(4, 0.25, 700, 1, StepScheme::ExplicitEuler), u0),
        std::runtime_error);

    // With strong multiplicative noise near the pathwise threshold a
    // minority of paths blows past the cap while the ensemble survives.
    const GalerkinSystem noisy = assemble(scalar_spec(0.0, 10.5));
    const MeanSquareCurve curve =
        mean_square_curve(noisy, ensemble(64, 0.05, 1200, 12), u0);
    CHECK(curve.diverged_count > 0);
    CHECK(curve.diverged_count < 64);
    for (double v : curve.mean_sq) CHECK(std::isfinite(v));
}
