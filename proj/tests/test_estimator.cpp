#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "qcbadc/estimator.hpp"

using namespace qcbadc;

namespace {

// Random +-1 trace, channel values independent per period.
ControlTrace random_trace(int channels, long long length, unsigned seed) {
    ControlTrace tr;
    tr.channels = channels;
    tr.length = length;
    tr.period = 1.0;
    tr.decisions.resize(static_cast<std::size_t>(channels) * length);
    std::mt19937 rng(seed);
    std::bernoulli_distribution coin(0.5);
    for (auto& d : tr.decisions) d = coin(rng) ? 1 : -1;
    return tr;
}

}  // namespace

// The production solver (FFT-assembled normal equations + Cholesky with
// iterative refinement) must match a dense ridge pseudoinverse computed the
// brute-force way on a small instance.
TEST_CASE("calibrate matches the dense ridge pseudoinverse oracle") {
    const int channels = 2;
    const int taps = 8;
    const long long length = 256;
    const ControlTrace trace = random_trace(channels, length, 7);

    // Reference: an arbitrary fixed linear functional of the trace window
    // plus deterministic pseudo-noise, so the LS problem has a nontrivial
    // residual.
    std::mt19937 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> truth(channels * taps);
    for (auto& v : truth) v = gauss(rng);

    const int delay = taps / 2;
    std::vector<double> ref(length, 0.0);
    for (long long k = 0; k < length; ++k) {
        double acc = 0.02 * gauss(rng);
        for (int ch = 0; ch < channels; ++ch)
            for (int m = 0; m < taps; ++m) {
                const long long t = k + m - delay;
                if (t < 0 || t >= length) continue;
                acc += truth[ch * taps + m] * trace.at(ch, t);
            }
        ref[k] = acc;
    }

    const double ridge = 1e-4;
    CalibrationConfig cfg;
    cfg.taps_per_channel = taps;
    cfg.ridge = ridge;
    cfg.pair_channels = false;
    const FirEstimator fir = calibrate(trace, {ref}, cfg);

    // Dense oracle over the same interior window [delay, length - delay).
    const int cols = channels * taps;
    const long long rows = length - taps;
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd y(rows);
    for (long long r = 0; r < rows; ++r) {
        const long long k = r + delay;
        for (int ch = 0; ch < channels; ++ch)
            for (int m = 0; m < taps; ++m)
                x(r, ch * taps + m) = trace.at(ch, k + m - delay);
        y(r) = ref[k];
    }
    const Eigen::MatrixXd gram =
        x.transpose() * x + ridge * Eigen::MatrixXd::Identity(cols, cols);
    const Eigen::VectorXd h = gram.ldlt().solve(x.transpose() * y);

    REQUIRE(fir.n_outputs == 1);
    REQUIRE(fir.n_channels == channels);
    REQUIRE(fir.taps_per_channel == taps);
    for (int ch = 0; ch < channels; ++ch)
        for (int m = 0; m < taps; ++m)
            CHECK(fir.tap(0, ch, m) ==
                  doctest::Approx(h(ch * taps + m)).epsilon(1e-8).scale(1.0));
}

TEST_CASE("calibrate recovers an exact FIR relation") {
    const int channels = 2;
    const int taps = 16;
    const ControlTrace trace = random_trace(channels, 2048, 3);
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> truth(channels * taps);
    for (auto& v : truth) v = gauss(rng);

    const int delay = taps / 2;
    std::vector<double> ref(trace.length, 0.0);
    for (long long k = 0; k < trace.length; ++k)
        for (int ch = 0; ch < channels; ++ch)
            for (int m = 0; m < taps; ++m) {
                const long long t = k + m - delay;
                if (t < 0 || t >= trace.length) continue;
                ref[k] += truth[ch * taps + m] * trace.at(ch, t);
            }

    CalibrationConfig cfg;
    cfg.taps_per_channel = taps;
    cfg.ridge = 0.0;
    cfg.pair_channels = false;
    const FirEstimator fir = calibrate(trace, {ref}, cfg);
    for (int ch = 0; ch < channels; ++ch)
        for (int m = 0; m < taps; ++m)
            CHECK(fir.tap(0, ch, m) ==
                  doctest::Approx(truth[ch * taps + m]).epsilon(1e-9).scale(1.0));

    // And the reconstruction reproduces the reference on the interior.
    const auto est = estimate(trace, fir);
    for (std::size_t j = 0; j < est[0].size(); ++j)
        CHECK(est[0][j] == doctest::Approx(ref[j + delay]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("estimate is linear in the tap bank") {
    const ControlTrace trace = random_trace(3, 512, 21);
    std::mt19937 rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto random_fir = [&](int seed_shift) {
        FirEstimator f;
        f.n_outputs = 1;
        f.n_channels = 3;
        f.taps_per_channel = 8;
        f.delay = 4;
        f.taps.resize(3 * 8);
        for (auto& t : f.taps) t = gauss(rng) + seed_shift;
        return f;
    };
    const FirEstimator a = random_fir(0);
    const FirEstimator b = random_fir(1);
    FirEstimator sum = a;
    for (std::size_t i = 0; i < sum.taps.size(); ++i) sum.taps[i] += b.taps[i];

    const auto ea = estimate(trace, a);
    const auto eb = estimate(trace, b);
    const auto es = estimate(trace, sum);
    for (std::size_t j = 0; j < es[0].size(); ++j)
        CHECK(es[0][j] ==
              doctest::Approx(ea[0][j] + eb[0][j]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("large ridge shrinks the taps toward zero") {
    const ControlTrace trace = random_trace(2, 1024, 9);
    std::vector<double> ref(trace.length);
    for (long long k = 0; k < trace.length; ++k)
        ref[k] = 0.5 * trace.at(0, k) - 0.25 * trace.at(1, k);

    CalibrationConfig cfg;
    cfg.taps_per_channel = 8;
    cfg.pair_channels = false;

    cfg.ridge = 1e-9;
    const FirEstimator small = calibrate(trace, {ref}, cfg);
    cfg.ridge = 1e9;
    const FirEstimator large = calibrate(trace, {ref}, cfg);

    auto norm = [](const FirEstimator& f) {
        double acc = 0.0;
        for (double t : f.taps) acc += t * t;
        return std::sqrt(acc);
    };
    CHECK(norm(large) < 1e-4 * norm(small));
}

// With two references forming a complex target and a truly complex-symmetric
// channel relation, the paired solver (half the unknowns) must agree with
// the unpaired one.
TEST_CASE("paired and unpaired calibration agree on symmetric data") {
    const int n = 1;  // one complex channel = 2 real channels
    const int taps = 8;
    const long long length = 1024;
    const ControlTrace trace = random_trace(2 * n, length, 33);

    // Complex taps g_m; references are Re / Im of sum_m g_m * z_{k+m-delay}
    // with z = s + i*sbar.
    std::mt19937 rng(41);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::complex<double>> g(taps);
    for (auto& v : g) v = {gauss(rng), gauss(rng)};

    const int delay = taps / 2;
    std::vector<double> re(length, 0.0), im(length, 0.0);
    for (long long k = 0; k < length; ++k) {
        std::complex<double> acc = 0.0;
        for (int m = 0; m < taps; ++m) {
            const long long t = k + m - delay;
            if (t < 0 || t >= length) continue;
            acc += g[m] * std::complex<double>(trace.at(0, t), trace.at(1, t));
        }
        re[k] = acc.real();
        im[k] = acc.imag();
    }

    CalibrationConfig cfg;
    cfg.taps_per_channel = taps;
    cfg.ridge = 0.0;

    cfg.pair_channels = true;
    const FirEstimator paired = calibrate(trace, {re, im}, cfg);
    cfg.pair_channels = false;
    const FirEstimator unpaired = calibrate(trace, {re, im}, cfg);

    REQUIRE(paired.n_outputs == 2);
    REQUIRE(unpaired.n_outputs == 2);
    for (int out = 0; out < 2; ++out)
        for (int ch = 0; ch < 2; ++ch)
            for (int m = 0; m < taps; ++m)
                CHECK(paired.tap(out, ch, m) ==
                      doctest::Approx(unpaired.tap(out, ch, m))
                          .epsilon(1e-7)
                          .scale(1.0));

    // Both reproduce the complex reference.
    const auto est = estimate_complex(trace, paired);
    for (std::size_t j = 0; j < est.size(); ++j) {
        CHECK(est[j].real() ==
              doctest::Approx(re[j + delay]).epsilon(1e-7).scale(1.0));
        CHECK(est[j].imag() ==
              doctest::Approx(im[j + delay]).epsilon(1e-7).scale(1.0));
    }
}

TEST_CASE("calibrate input validation") {
    const ControlTrace trace = random_trace(2, 512, 1);
    std::vector<double> ref(trace.length, 0.0);
    CalibrationConfig cfg;
    cfg.pair_channels = false;

    cfg.taps_per_channel = 7;  // odd
    CHECK_THROWS_AS(calibrate(trace, {ref}, cfg), std::invalid_argument);

    cfg.taps_per_channel = 8;
    std::vector<double> short_ref(trace.length - 1, 0.0);
    CHECK_THROWS_AS(calibrate(trace, {short_ref}, cfg), std::invalid_argument);

    cfg.taps_per_channel = 256;  // trace far too short to overdetermine
    CHECK_THROWS_AS(calibrate(trace, {ref}, cfg), std::invalid_argument);

    CHECK_THROWS_AS(calibrate(trace, {}, cfg), std::invalid_argument);
}
