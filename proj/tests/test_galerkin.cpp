#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "shesim/galerkin.hpp"
#include "shesim/quadrature.hpp"

using namespace shesim;
using Catch::Approx;

namespace {

SystemSpec spec(int n, int m, double beta0, double beta1) {
    SystemSpec s;
    s.n = n;
    s.m = m;
    s.beta0 = beta0;
    s.beta1 = beta1;
    s.covariance = CovarianceModel::power_law(2.0, m);
    return s;
}

double poly_x_1mx(double x) { return x * (1.0 - x); }

}  // namespace

TEST_CASE("assembly of the scalar system") {
    const GalerkinSystem sys = assemble(spec(1, 1, 0.0, 1.0));
    CHECK(sys.drift_diag(0) == Approx(kPi * kPi).epsilon(1e-15));
    CHECK(sys.noise_mat(1)(0, 0) == Approx(triple_product(1, 1, 1)).epsilon(1e-15));
    CHECK(sys.alpha.alpha(0, 0) == 1.0);
}

TEST_CASE("assembly fills only odd-parity entries") {
    const GalerkinSystem sys = assemble(spec(2, 1, 1.0, 0.5));
    CHECK(sys.drift_diag(0) == Approx(kPi * kPi + 1.0).epsilon(1e-15));
    CHECK(sys.drift_diag(1) == Approx(4.0 * kPi * kPi + 1.0).epsilon(1e-15));
    const Eigen::MatrixXd& a1 = sys.noise_mat(1);
    // j = 1: parity of 1 + k + i selects the diagonal here.
    CHECK(a1(0, 0) == Approx(triple_product(1, 1, 1)));
    CHECK(a1(1, 1) == Approx(triple_product(1, 2, 2)));
    CHECK(a1(0, 1) == 0.0);
    CHECK(a1(1, 0) == 0.0);
    // beta1 is carried in the spec, not baked into the matrices.
    CHECK(sys.spec.beta1 == 0.5);
}

TEST_CASE("noise matrices are exactly symmetric") {
    const GalerkinSystem sys = assemble(spec(7, 5, 0.3, 1.0));
    for (int j = 1; j <= 5; ++j) {
        const Eigen::MatrixXd& a = sys.noise_mat(j);
        CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("with_betas rebuilds the drift but shares tensors") {
    const GalerkinSystem base = assemble(spec(4, 3, 0.0, 1.0));
    const GalerkinSystem moved = with_betas(base, 2.5, 0.75);
    CHECK(moved.spec.beta0 == 2.5);
    CHECK(moved.spec.beta1 == 0.75);
    CHECK(moved.drift_diag(0) == Approx(kPi * kPi + 2.5).epsilon(1e-15));
    CHECK(moved.noise_mats.get() == base.noise_mats.get());
}

TEST_CASE("projection of x(1-x): odd modes 4 sqrt(2) / (k pi)^3") {
    const StateVector u = project_initial(poly_x_1mx, 3);
    const double c1 = 4.0 * std::sqrt(2.0) / std::pow(kPi, 3);
    const double c3 = 4.0 * std::sqrt(2.0) / std::pow(3.0 * kPi, 3);
    CHECK(u(0) == Approx(c1).epsilon(1e-10));
    CHECK(u(1) == Approx(0.0).margin(1e-12));
    CHECK(u(2) == Approx(c3).epsilon(1e-10));
    // Decimals quoted to the precision of the closed form.
    CHECK(u(0) == Approx(0.18244222961109438).epsilon(1e-9));
    CHECK(u(2) == Approx(0.006757119615225718).epsilon(1e-9));
}

TEST_CASE("projection passthrough for coefficient lists") {
    const StateVector u = project_initial(std::vector<double>{1.0, 0.0, 0.5}, 5);
    CHECK(u.size() == 5);
    CHECK(u(0) == 1.0);
    CHECK(u(2) == 0.5);
    CHECK(u(4) == 0.0);
    const StateVector trunc = project_initial(std::vector<double>{1.0, 2.0, 3.0}, 2);
    CHECK(trunc.size() == 2);
    CHECK(trunc(1) == 2.0);

    // Idempotence: re-projecting projected coefficients changes nothing.
    std::vector<double> coeffs{0.3, -0.2, 0.7};
    const StateVector once = project_initial(coeffs, 4);
    std::vector<double> round(once.data(), once.data() + once.size());
    CHECK(project_initial(round, 4) == once);
}

TEST_CASE("projection of basis functions recovers unit vectors") {
    const StateVector u = project_initial([](double x) { return eval_eigenfunction(1, x); }, 4);
    CHECK(u(0) == Approx(1.0).epsilon(1e-10));
    for (int k = 1; k < 4; ++k) CHECK(u(k) == Approx(0.0).margin(1e-10));
    const StateVector z = project_initial([](double) { return 0.0; }, 4);
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reconstruction values") {
    StateVector e1 = StateVector::Zero(3);
    e1(0) = 1.0;
    const auto vals = reconstruct(e1, {0.5, 0.0, 1.0});
    CHECK(vals[0] == Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(vals[1] == Approx(0.0).margin(1e-14));
    CHECK(vals[2] == Approx(0.0).margin(1e-13));

    const StateVector u = project_initial(poly_x_1mx, 21);
    const auto mid = reconstruct(u, {0.25});
    CHECK(mid[0] == Approx(0.1875).margin(1e-4));

    CHECK_THROWS_AS(reconstruct(e1, {1.5}), std::domain_error);
}

TEST_CASE("l2 norm and Parseval") {
    StateVector v(2);
    v << 3.0, 4.0;
    CHECK(l2_norm_sq(v) == 25.0);
    CHECK(l2_norm_sq(StateVector::Zero(4)) == 0.0);

    // Parseval for the projected polynomial: integral of x^2 (1-x)^2 is 1/30.
    const StateVector u = project_initial(poly_x_1mx, 50);
    CHECK(l2_norm_sq(u) == Approx(1.0 / 30.0).margin(1e-8));

    // Parseval for a random state against quadrature of the reconstruction.
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    StateVector w(20);
    for (int k = 0; k < 20; ++k) w(k) = coeff(gen);
    const double direct = l2_norm_sq(w);
    const double integral = quad::integrate01(
        [&](double x) {
            const double val = reconstruct(w, {x})[0];
            return val * val;
        },
        8192);
    CHECK(integral == Approx(direct).margin(1e-8));
}

TEST_CASE("spec validation") {
    SystemSpec bad = spec(0, 1, 0.0, 0.0);
    CHECK_THROWS_AS(assemble(bad), std::domain_error);
}
