#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "qcbadc/analysis.hpp"

using namespace qcbadc;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// Parseval: with a rectangular window the integrated PSD equals the mean
// power of the sequence.
TEST_CASE("psd satisfies Parseval with a rectangular window") {
    const int nfft = 1024;
    std::mt19937 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::complex<double>> x(4 * nfft);
    for (auto& v : x) v = {gauss(rng), gauss(rng)};

    const Spectrum spec = psd(x, nfft, Window::rectangular, 1.0);

    double integrated = 0.0;
    for (double p : spec.psd) integrated += p * spec.bin_width();
    double mean_power = 0.0;
    for (const auto& v : x) mean_power += std::norm(v);
    mean_power /= static_cast<double>(x.size());

    CHECK(integrated ==
          doctest::Approx(mean_power).epsilon(1e-9));
}

TEST_CASE("psd recovers an on-bin tone's power with a Hann window") {
    const int nfft = 2048;
    const double f = 100.0 / nfft;  // exactly on a bin
    const double amp = 0.7;
    std::vector<std::complex<double>> x(2 * nfft);
    for (std::size_t k = 0; k < x.size(); ++k)
        x[k] = std::polar(amp, kTwoPi * f * static_cast<double>(k));

    const Spectrum spec = psd(x, nfft, Window::hann, 1.0);

    // The window-power normalization makes the PSD power-preserving: the
    // tone spreads over the Hann main lobe but its integrated power is
    // exactly amp^2 (Parseval applied to the windowed tone).
    const int center = spec.bin_of(f);
    double tone_power = 0.0;
    for (int i = center - 3; i <= center + 3; ++i)
        tone_power += spec.psd[i] * spec.bin_width();
    CHECK(tone_power == doctest::Approx(amp * amp).epsilon(1e-9));

    // Frequency axis: ascending, covering [-fs/2, fs/2).
    CHECK(spec.frequency_hz.front() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(spec.frequency_hz.back() ==
          doctest::Approx(0.5 - spec.bin_width()).epsilon(1e-9));
    CHECK(spec.frequency_hz[center] == doctest::Approx(f).epsilon(1e-12));
}

TEST_CASE("psd input validation") {
    std::vector<std::complex<double>> x(16);
    CHECK_THROWS_AS(psd(x, 32), std::invalid_argument);
    CHECK_THROWS_AS(psd(x, 1), std::invalid_argument);
}

TEST_CASE("bin_of maps frequencies to nearest bins and clamps") {
    Spectrum spec;
    spec.nfft = 8;
    spec.fs_hz = 1.0;
    CHECK(spec.bin_of(-0.5) == 0);
    CHECK(spec.bin_of(0.0) == 4);
    CHECK(spec.bin_of(0.125) == 5);
    CHECK(spec.bin_of(10.0) == 7);   // clamped
    CHECK(spec.bin_of(-10.0) == 0);  // clamped
}

namespace {

// Synthetic spectrum: flat floor at floor_db with a Gaussian (in dB) notch of
// the given depth at f0, plus an optional spike.
Spectrum synthetic_floor(int nfft, double floor_db, double f0, double depth_db,
                         double width) {
    Spectrum spec;
    spec.nfft = nfft;
    spec.fs_hz = 1.0;
    spec.frequency_hz.resize(nfft);
    spec.psd.resize(nfft);
    for (int i = 0; i < nfft; ++i) {
        const double f = (i - nfft / 2) / static_cast<double>(nfft);
        spec.frequency_hz[i] = f;
        const double d = depth_db * std::exp(-0.5 * std::pow((f - f0) / width, 2));
        spec.psd[i] = std::pow(10.0, (floor_db - d) / 10.0);
    }
    return spec;
}

}  // namespace

TEST_CASE("estimate_notch finds a synthetic dip") {
    const Spectrum spec = synthetic_floor(4096, -90.0, 0.125, 25.0, 0.01);
    const auto f_hat = estimate_notch(spec, {}, 0.0625, 0.1875);
    REQUIRE(f_hat.has_value());
    CHECK(*f_hat == doctest::Approx(0.125).epsilon(0.01));
}

TEST_CASE("estimate_notch rejects a flat spectrum") {
    const Spectrum spec = synthetic_floor(4096, -90.0, 0.125, 2.0, 0.01);
    CHECK_FALSE(estimate_notch(spec, {}, 0.0625, 0.1875).has_value());
}

TEST_CASE("estimate_notch ignores excluded signal bins") {
    Spectrum spec = synthetic_floor(4096, -90.0, 0.125, 25.0, 0.01);
    // Plant a deep artificial spike-dip at another frequency and exclude it.
    std::vector<int> excluded;
    const int fake = spec.bin_of(0.16);
    for (int i = fake - 2; i <= fake + 2; ++i) {
        spec.psd[i] = 1e-30;
        excluded.push_back(i);
    }
    const auto f_hat = estimate_notch(spec, excluded, 0.0625, 0.1875);
    REQUIRE(f_hat.has_value());
    CHECK(*f_hat == doctest::Approx(0.125).epsilon(0.015));
}

TEST_CASE("snr_in_band on a constructed spectrum") {
    const int nfft = 1024;
    Spectrum spec;
    spec.nfft = nfft;
    spec.fs_hz = 1.0;
    spec.frequency_hz.resize(nfft);
    spec.psd.assign(nfft, 1e-8);  // flat noise
    for (int i = 0; i < nfft; ++i)
        spec.frequency_hz[i] = (i - nfft / 2) / static_cast<double>(nfft);
    const double f_test = 0.1;
    const int center = spec.bin_of(f_test);
    spec.psd[center] = 1e-2;

    const SnrReport rep = snr_in_band(spec, 0.125, 0.25, f_test, 3);
    // signal = 1e-2 * df (+ 6 guard noise bins), noise = (bins - 7) * 1e-8 * df
    const int band_bins = spec.bin_of(0.25) - spec.bin_of(0.0) + 1;
    const double expected_sig = (1e-2 + 6.0 * 1e-8) * spec.bin_width();
    const double expected_noise = (band_bins - 7) * 1e-8 * spec.bin_width();
    CHECK(rep.signal_power == doctest::Approx(expected_sig).epsilon(1e-12));
    CHECK(rep.noise_power == doctest::Approx(expected_noise).epsilon(1e-9));
    CHECK(rep.snr_db ==
          doctest::Approx(10.0 * std::log10(expected_sig / expected_noise))
              .epsilon(1e-9));

    CHECK_THROWS_AS(snr_in_band(spec, 0.45, 0.25, 0.4, 3), std::invalid_argument);
    CHECK_THROWS_AS(snr_in_band(spec, 0.125, 0.25, 0.3, 3), std::invalid_argument);
}
