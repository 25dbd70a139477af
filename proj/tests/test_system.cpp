#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "qcbadc/system.hpp"

using namespace qcbadc;

TEST_CASE("design_lowpass closed form") {
    DesignSpec spec;
    spec.n = 6;
    spec.osr = 8.0;
    spec.fs_hz = 1.0;
    spec.fn_hz = 0.125;
    const LowpassLeapfrog lp = design_lowpass(spec);

    CHECK(lp.n == 6);
    CHECK(lp.period == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lp.beta == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(lp.omega_b ==
          doctest::Approx(std::numbers::pi / 16.0).epsilon(1e-15));
    CHECK(lp.alpha ==
          doctest::Approx(-lp.omega_b * lp.omega_b / (4.0 * lp.beta)).epsilon(1e-15));
    // 2*beta*T = 1: the worst-case superposition bound holds with equality.
    CHECK(2.0 * lp.beta * lp.period == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("design_lowpass scales with fs and osr") {
    DesignSpec spec;
    spec.fs_hz = 2.4e9;
    spec.fn_hz = 0.125 * spec.fs_hz;
    spec.osr = 4.0;
    const LowpassLeapfrog lp = design_lowpass(spec);
    CHECK(lp.beta == doctest::Approx(1.2e9).epsilon(1e-15));
    CHECK(lp.omega_b ==
          doctest::Approx(std::numbers::pi * 2.4e9 / 8.0).epsilon(1e-15));
    CHECK(lp.period == doctest::Approx(1.0 / 2.4e9).epsilon(1e-15));
}

TEST_CASE("DesignSpec validation") {
    DesignSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.n = 0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = DesignSpec{};
    spec.osr = 0.5;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = DesignSpec{};
    spec.fn_hz = 0.5;  // must be < fs/2
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = DesignSpec{};
    spec.fn_hz = -0.01;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = DesignSpec{};
    spec.tau_dc = 1.5;  // >= T
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = DesignSpec{};
    spec.phi_kappa = 7.0;  // >= 2*pi
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("lowpass_matrices structure") {
    DesignSpec spec;
    spec.n = 4;
    const LowpassLeapfrog lp = design_lowpass(spec);
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    lowpass_matrices(lp, a, b);

    REQUIRE(a.rows() == 4);
    REQUIRE(a.cols() == 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (j == i + 1)
                CHECK(a(i, j) == lp.alpha);
            else if (j == i - 1)
                CHECK(a(i, j) == lp.beta);
            else
                CHECK(a(i, j) == 0.0);
        }
    CHECK(b(0) == lp.beta);
    for (int i = 1; i < 4; ++i) CHECK(b(i) == 0.0);
}

TEST_CASE("quadrature_transform block structure") {
    DesignSpec spec;
    spec.n = 3;
    const LowpassLeapfrog lp = design_lowpass(spec);
    const double omega_n = 2.0 * std::numbers::pi * 0.125;
    const QuadratureSystem q = quadrature_transform(lp, omega_n);

    Eigen::MatrixXd a_lp;
    Eigen::VectorXd b_lp;
    lowpass_matrices(lp, a_lp, b_lp);

    REQUIRE(q.a.rows() == 6);
    CHECK((q.a.topLeftCorner(3, 3) - a_lp).norm() == 0.0);
    CHECK((q.a.bottomRightCorner(3, 3) - a_lp).norm() == 0.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(q.a(i, 3 + i) == -omega_n);
        CHECK(q.a(3 + i, i) == omega_n);
    }
    CHECK((q.b.col(0).head(3) - b_lp).norm() == 0.0);
    CHECK((q.b.col(1).tail(3) - b_lp).norm() == 0.0);
    CHECK(q.b.col(0).tail(3).norm() == 0.0);
    CHECK(q.b.col(1).head(3).norm() == 0.0);

    CHECK_THROWS_AS(quadrature_transform(lp, -1.0), std::invalid_argument);
}

// The quadrature state matrix is similar to a pair of shifted low-pass
// matrices: its eigenvalues are exactly {lambda_lp + i*omega_n} and
// {lambda_lp - i*omega_n}.
TEST_CASE("quadrature eigenvalues are the shifted low-pass eigenvalues") {
    DesignSpec spec;
    spec.n = 5;
    const LowpassLeapfrog lp = design_lowpass(spec);
    const double omega_n = 2.0 * std::numbers::pi * 0.2;
    const QuadratureSystem q = quadrature_transform(lp, omega_n);

    Eigen::MatrixXd a_lp;
    Eigen::VectorXd b_lp;
    lowpass_matrices(lp, a_lp, b_lp);

    const Eigen::VectorXcd lp_eigs = a_lp.eigenvalues();
    std::vector<std::complex<double>> expected;
    for (int i = 0; i < lp_eigs.size(); ++i) {
        expected.push_back(lp_eigs(i) + std::complex<double>(0.0, omega_n));
        expected.push_back(lp_eigs(i) - std::complex<double>(0.0, omega_n));
    }
    const Eigen::VectorXcd q_eigs = q.a.eigenvalues();
    REQUIRE(static_cast<int>(expected.size()) == q_eigs.size());

    // Greedy nearest-neighbor matching; every quadrature eigenvalue must sit
    // within 1e-9 of a distinct shifted low-pass eigenvalue.
    std::vector<bool> used(expected.size(), false);
    for (int i = 0; i < q_eigs.size(); ++i) {
        double best = 1e300;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < expected.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(q_eigs(i) - expected[j]);
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        used[best_j] = true;
        CHECK(best < 1e-9);
    }
}

TEST_CASE("predicted_snr_delta_db") {
    CHECK(predicted_snr_delta_db(3, 2.0) ==
          doctest::Approx(60.0 * std::log10(2.0)).epsilon(1e-15));
    CHECK(predicted_snr_delta_db(6, 1.0) == 0.0);
    CHECK(predicted_snr_delta_db(2, 0.5) ==
          doctest::Approx(-40.0 * std::log10(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(predicted_snr_delta_db(3, 0.0), std::invalid_argument);
}
