#include "qcbadc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"

namespace qcbadc {

int Spectrum::bin_of(double f) const {
    const int idx = static_cast<int>(std::lround((f + fs_hz / 2.0) / bin_width()));
    return std::clamp(idx, 0, nfft - 1);
}

Spectrum psd(const std::vector<std::complex<double>>& signal, int nfft, Window window,
             double fs_hz) {
    if (nfft < 2) throw std::invalid_argument("psd: nfft must be >= 2");
    if (static_cast<long long>(signal.size()) < nfft)
        throw std::invalid_argument("psd: signal shorter than nfft");

    std::vector<double> w(nfft, 1.0);
    if (window == Window::hann) {
        for (int j = 0; j < nfft; ++j)
            w[j] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * j / nfft));
    }
    double w_energy = 0.0;
    for (double v : w) w_energy += v * v;

    const long long segments = static_cast<long long>(signal.size()) / nfft;
    detail::ComplexFft fft(static_cast<std::size_t>(nfft));
    std::vector<std::complex<double>> buf(nfft), spec(nfft);
    std::vector<double> accum(nfft, 0.0);
    for (long long seg = 0; seg < segments; ++seg) {
        const std::complex<double>* base = signal.data() + seg * nfft;
        for (int j = 0; j < nfft; ++j) buf[j] = base[j] * w[j];
        fft.forward(buf.data(), spec.data());
        for (int j = 0; j < nfft; ++j) accum[j] += std::norm(spec[j]);
    }

    Spectrum out;
    out.nfft = nfft;
    out.window = window;
    out.fs_hz = fs_hz;
    out.frequency_hz.resize(nfft);
    out.psd.resize(nfft);
    const double scale = 1.0 / (segments * fs_hz * w_energy);
    for (int i = 0; i < nfft; ++i) {
        // shifted order: bin i holds FFT index (i + nfft/2) mod nfft
        const int b = (i + nfft / 2) % nfft;
        out.frequency_hz[i] = (i - nfft / 2) * fs_hz / nfft;
        out.psd[i] = accum[b] * scale;
    }
    return out;
}

SnrReport snr_in_band(const Spectrum& spec, double f_n, double bandwidth,
                      double f_test, int guard_bins, double cap_db) {
    const double f_lo = f_n - bandwidth / 2.0;
    const double f_hi = f_n + bandwidth / 2.0;
    if (f_lo < -spec.fs_hz / 2.0 || f_hi > spec.fs_hz / 2.0)
        throw std::invalid_argument("snr_in_band: band exceeds the Nyquist span");
    if (f_test < f_lo || f_test > f_hi)
        throw std::invalid_argument("snr_in_band: test tone outside the band");

    SnrReport rep;
    rep.f_lo = f_lo;
    rep.f_hi = f_hi;
    const double df = spec.bin_width();
    const int center = spec.bin_of(f_test);
    const int lo = spec.bin_of(f_lo);
    const int hi = spec.bin_of(f_hi);
    for (int i = std::max(center - guard_bins, 0);
         i <= std::min(center + guard_bins, spec.nfft - 1); ++i) {
        rep.signal_bins.push_back(i);
        rep.signal_power += spec.psd[i] * df;
    }
    for (int i = lo; i <= hi; ++i) {
        if (i < 0 || i >= spec.nfft) continue;
        if (std::abs(i - center) <= guard_bins) continue;
        rep.noise_power += spec.psd[i] * df;
        ++rep.noise_bin_count;
    }
    if (rep.noise_power <= 0.0 || rep.noise_bin_count == 0) {
        rep.snr_db = cap_db;
    } else {
        rep.snr_db = std::min(10.0 * std::log10(rep.signal_power / rep.noise_power),
                              cap_db);
    }
    return rep;
}

namespace {

constexpr int kSmoothWindow = 32;
constexpr double kMinDepthDb = 5.0;
constexpr double kDepthScaleDb = 5.0;

std::vector<double> median_smooth(const std::vector<double>& v, int window) {
    const int n = static_cast<int>(v.size());
    std::vector<double> out(n);
    std::vector<double> buf;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(i - window / 2, 0);
        const int hi = std::min(i + window / 2, n - 1);
        buf.assign(v.begin() + lo, v.begin() + hi + 1);
        std::nth_element(buf.begin(), buf.begin() + buf.size() / 2, buf.end());
        double med = buf[buf.size() / 2];
        if (buf.size() % 2 == 0) {
            auto lower = std::max_element(buf.begin(), buf.begin() + buf.size() / 2);
            med = (med + *lower) / 2.0;
        }
        out[i] = med;
    }
    return out;
}

}  // namespace

std::optional<double> estimate_notch(const Spectrum& spec,
                                     const std::vector<int>& exclude_bins,
                                     double search_lo, double search_hi) {
    std::vector<double> log_psd(spec.nfft);
    for (int i = 0; i < spec.nfft; ++i)
        log_psd[i] = spec.psd[i] > 0.0 ? 10.0 * std::log10(spec.psd[i]) : -400.0;
    const std::vector<double> smooth = median_smooth(log_psd, kSmoothWindow);

    std::vector<char> excluded(spec.nfft, 0);
    for (int b : exclude_bins)
        if (b >= 0 && b < spec.nfft) excluded[b] = 1;

    const int lo = std::clamp(spec.bin_of(search_lo), 0, spec.nfft - 1);
    const int hi = std::clamp(spec.bin_of(search_hi), 0, spec.nfft - 1);
    int min_bin = -1;
    std::vector<double> candidates;
    for (int i = lo; i <= hi; ++i) {
        if (excluded[i]) continue;
        candidates.push_back(smooth[i]);
        if (min_bin < 0 || smooth[i] < smooth[min_bin]) min_bin = i;
    }
    if (min_bin < 0 || candidates.size() < 3) return std::nullopt;

    std::nth_element(candidates.begin(), candidates.begin() + candidates.size() / 2,
                     candidates.end());
    const double median_level = candidates[candidates.size() / 2];
    const double max_depth = median_level - smooth[min_bin];
    if (max_depth < kMinDepthDb) return std::nullopt;

    // The noise floor is a broad valley with one deep lobe per
    // noise-transfer-function zero; the raw argmin jumps between those lobes
    // from realization to realization, while the zeros themselves scatter
    // symmetrically around the notch. A soft-min centroid — bins weighted by
    // exp(depth / 5 dB) — averages over the lobes while keeping the shallow
    // flanks (which mostly encode the floor's overall tilt) from dragging
    // the estimate, and is far more stable than any single minimum.
    double weight_sum = 0.0, freq_sum = 0.0;
    for (int i = lo; i <= hi; ++i) {
        if (excluded[i]) continue;
        const double depth = median_level - smooth[i];
        if (depth <= 0.0) continue;
        const double w = std::exp((depth - max_depth) / kDepthScaleDb);
        weight_sum += w;
        freq_sum += w * spec.frequency_hz[i];
    }
    if (weight_sum <= 0.0) return std::nullopt;
    return freq_sum / weight_sum;
}

std::optional<double> estimate_notch(const Spectrum& spec,
                                     const std::vector<int>& exclude_bins) {
    return estimate_notch(spec, exclude_bins, -spec.fs_hz / 2.0,
                          spec.fs_hz / 2.0 - spec.bin_width());
}

}  // namespace qcbadc
