#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace qcbadc {

enum class Window { rectangular, hann };

/// Two-sided power spectral density of a complex sequence, stored over
/// [-fs/2, fs/2) in ascending frequency order.
struct Spectrum {
    std::vector<double> frequency_hz;  ///< length nfft
    std::vector<double> psd;           ///< V^2/Hz per bin
    int nfft = 0;
    Window window = Window::hann;
    double fs_hz = 1.0;

    double bin_width() const { return fs_hz / nfft; }
    /// Index of the bin closest to f.
    int bin_of(double f) const;
};

struct SnrReport {
    double snr_db = 0.0;
    double signal_power = 0.0;
    double noise_power = 0.0;
    double f_lo = 0.0;  ///< band edges, Hz
    double f_hi = 0.0;
    std::vector<int> signal_bins;
    int noise_bin_count = 0;
};

/// Windowed periodogram averaged over the available non-overlapping nfft
/// segments, window power compensated.
Spectrum psd(const std::vector<std::complex<double>>& signal, int nfft = 1 << 14,
             Window window = Window::hann, double fs_hz = 1.0);

/// In-band SNR: signal power within +-guard_bins of f_test, noise power over
/// the rest of the band [f_n - bandwidth/2, f_n + bandwidth/2]. The ratio is
/// capped (empty or zero noise sets report cap_db).
SnrReport snr_in_band(const Spectrum& spec, double f_n, double bandwidth,
                      double f_test, int guard_bins = 3, double cap_db = 200.0);

/// Locate the conversion notch: median-smooth the log-PSD, exclude the
/// listed signal bins, and take the soft-min centroid of the valley (bins
/// weighted by exp(depth / 5 dB) below the median floor) inside the search
/// interval. Returns nothing when the spectrum has no dip of at least 5 dB.
std::optional<double> estimate_notch(const Spectrum& spec,
                                     const std::vector<int>& exclude_bins,
                                     double search_lo, double search_hi);
std::optional<double> estimate_notch(const Spectrum& spec,
                                     const std::vector<int>& exclude_bins = {});

}  // namespace qcbadc
