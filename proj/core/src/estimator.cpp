#include "qcbadc/estimator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fft.hpp"

namespace qcbadc {

namespace {

using cd = std::complex<double>;

// Frequency-domain application of the tap bank,
//   y[k] = sum_ch sum_m h[ch][m] * s_ch[k + m - delay].
struct ConvOperator {
    long long length;  // K
    int channels;
    int taps;   // K_h
    int delay;  // K_h / 2
    std::size_t padded;
    detail::RealFft fft;
    std::vector<std::vector<std::complex<double>>> stream_spec;  // per channel
    std::vector<double> scratch_time;
    std::vector<std::complex<double>> scratch_spec;
    std::vector<std::complex<double>> acc_spec;

    ConvOperator(const ControlTrace& trace, int taps_per_channel)
        : length(trace.length),
          channels(trace.channels),
          taps(taps_per_channel),
          delay(taps_per_channel / 2),
          padded(detail::next_pow2(static_cast<std::size_t>(length) + taps)),
          fft(padded) {
        stream_spec.resize(channels);
        std::vector<double> time(padded, 0.0);
        for (int ch = 0; ch < channels; ++ch) {
            for (long long k = 0; k < length; ++k) time[k] = trace.at(ch, k);
            fft.forward(time, stream_spec[ch]);
        }
    }

    // taps (channels * K_h) -> full-length output sequence.
    void forward(const std::vector<double>& h, std::vector<double>& y) {
        acc_spec.assign(fft.bins(), {0.0, 0.0});
        std::vector<double> g(padded, 0.0);
        for (int ch = 0; ch < channels; ++ch) {
            std::fill(g.begin(), g.end(), 0.0);
            for (int m = 0; m < taps; ++m) {
                const long long d = delay - m;  // g[d] = h[delay - d]
                const std::size_t idx = static_cast<std::size_t>(
                    (d % static_cast<long long>(padded) + padded) % padded);
                g[idx] = h[static_cast<std::size_t>(ch) * taps + m];
            }
            fft.forward(g, scratch_spec);
            const auto& s = stream_spec[ch];
            for (std::size_t i = 0; i < acc_spec.size(); ++i)
                acc_spec[i] += s[i] * scratch_spec[i];
        }
        fft.inverse(acc_spec, scratch_time);
        y.assign(scratch_time.begin(), scratch_time.begin() + length);
    }
};

double blackman(int j, int length) {
    const double x = static_cast<double>(j) / (length - 1);
    return 0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * x) +
           0.08 * std::cos(4.0 * std::numbers::pi * x);
}

double sinc_lp(double cutoff, double t) {
    if (t == 0.0) return 2.0 * cutoff;
    return std::sin(2.0 * std::numbers::pi * cutoff * t) / (std::numbers::pi * t);
}

// Analytic (one-sided) band-pass prefilter covering [f_lo, f_hi] cycles per
// sample: a Blackman-windowed sinc modulated to the band center. The
// passband is widened by 15% and the transition width set to 20% of the
// band so that the fit is not distorted at the band edges.
std::vector<cd> complex_bandpass(double f_lo, double f_hi, int& half_len) {
    const double center = 0.5 * (f_lo + f_hi);
    const double half_bw = 0.5 * (f_hi - f_lo) * 1.15;
    const double transition = (f_hi - f_lo) * 0.2;
    half_len = static_cast<int>(std::ceil(5.5 / transition / 2.0));
    const int length = 2 * half_len + 1;
    std::vector<cd> g(length);
    for (int j = 0; j < length; ++j) {
        const double t = j - half_len;
        const double phase = 2.0 * std::numbers::pi * center * t;
        g[j] = sinc_lp(half_bw, t) * blackman(j, length) *
               cd(std::cos(phase), std::sin(phase));
    }
    return g;
}

// Real band-pass (difference of windowed sincs) covering [f_lo, f_hi] and
// its mirror image; degenerates to a plain low-pass when f_lo reaches 0.
std::vector<cd> real_bandpass(double f_lo, double f_hi, int& half_len) {
    const double widen = 0.075 * (f_hi - f_lo);
    const double lo = std::max(0.0, f_lo - widen);
    const double hi = std::min(0.5, f_hi + widen);
    const double transition = (f_hi - f_lo) * 0.2;
    half_len = static_cast<int>(std::ceil(5.5 / transition / 2.0));
    const int length = 2 * half_len + 1;
    std::vector<cd> g(length);
    for (int j = 0; j < length; ++j) {
        const double t = j - half_len;
        g[j] = (sinc_lp(hi, t) - sinc_lp(lo, t)) * blackman(j, length);
    }
    return g;
}

// Linear convolution with the prefilter via the padded FFT, compensating
// the filter group delay so that filtered[k] lines up with x[k].
std::vector<cd> apply_prefilter(detail::ComplexFft& fft, const std::vector<cd>& g_spec,
                                const std::vector<cd>& x, int half_len) {
    auto spec = fft.forward(x);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= g_spec[i];
    auto out = fft.inverse(spec);
    std::vector<cd> y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = out[k + half_len];
    return y;
}

// Exact Gram matrix of the interior-window regression,
//   A[(i,m),(j,m')] = sum_{k in [k0,k1)} conj(fc_i[k+m-delay]) fc_j[k+m'-delay].
// The m = 0 row of each (i,j) diagonal d = m' - m comes from one FFT
// cross-correlation; subsequent m are O(1) sliding-window updates.
Eigen::MatrixXcd assemble_gram(detail::ComplexFft& fft,
                               const std::vector<std::vector<cd>>& fc, int taps,
                               int delay, long long k0, long long k1) {
    const int n = static_cast<int>(fc.size());
    const long long big_k = static_cast<long long>(fc[0].size());
    const long long padded = static_cast<long long>(fft.length());
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n * taps, n * taps);
    std::vector<cd> windowed(fc[0].size());
    for (int i = 0; i < n; ++i) {
        std::fill(windowed.begin(), windowed.end(), cd{});
        for (long long t = k0 - delay; t < k1 - delay; ++t) windowed[t] = fc[i][t];
        const auto w_spec = fft.forward(windowed);
        for (int j = i; j < n; ++j) {
            auto corr_spec = fft.forward(fc[j]);
            for (std::size_t q = 0; q < corr_spec.size(); ++q)
                corr_spec[q] *= std::conj(w_spec[q]);
            // corr[d] = sum_t conj(windowed_i[t]) fc_j[t + d]
            const auto corr = fft.inverse(corr_spec);
            for (int d = -(taps - 1); d <= taps - 1; ++d) {
                cd val = corr[static_cast<std::size_t>((d % padded + padded) % padded)];
                for (int m = 0; m < taps; ++m) {
                    const int mp = m + d;
                    if (mp >= 0 && mp < taps) {
                        gram(i * taps + m, j * taps + mp) = val;
                        if (j > i) gram(j * taps + mp, i * taps + m) = std::conj(val);
                    }
                    const long long t_add = k1 + m - delay;
                    const long long t_rem = k0 + m - delay;
                    if (t_add < big_k && t_add + d >= 0 && t_add + d < big_k)
                        val += std::conj(fc[i][t_add]) * fc[j][t_add + d];
                    if (t_rem + d >= 0 && t_rem + d < big_k)
                        val -= std::conj(fc[i][t_rem]) * fc[j][t_rem + d];
                }
            }
        }
    }
    return gram;
}

// b[(i,m)] = sum_{k in [k0,k1)} conj(fc_i[k+m-delay]) fy[k].
Eigen::VectorXcd assemble_rhs(detail::ComplexFft& fft,
                              const std::vector<std::vector<cd>>& fc,
                              const std::vector<cd>& fy, int taps, int delay,
                              long long k0, long long k1) {
    const int n = static_cast<int>(fc.size());
    const long long padded = static_cast<long long>(fft.length());
    Eigen::VectorXcd rhs(n * taps);
    std::vector<cd> windowed(fy.size(), cd{});
    for (long long k = k0; k < k1; ++k) windowed[k] = fy[k];
    const auto y_spec = fft.forward(windowed);
    for (int i = 0; i < n; ++i) {
        auto corr_spec = fft.forward(fc[i]);
        for (std::size_t q = 0; q < corr_spec.size(); ++q)
            corr_spec[q] = std::conj(corr_spec[q]) * y_spec[q];
        // corr[t] = sum_k conj(fc_i[k]) fy_windowed[k + t]; the rhs entry is
        // the value at lag -(m - delay).
        const auto corr = fft.inverse(corr_spec);
        for (int m = 0; m < taps; ++m) {
            const long long d = -(m - delay);
            rhs(i * taps + m) =
                corr[static_cast<std::size_t>((d % padded + padded) % padded)];
        }
    }
    return rhs;
}

// Ridge-regularized Cholesky solve with iterative refinement. The Gram
// matrix is modified in place (ridge added to the diagonal).
template <typename Mat>
Mat solve_normal_equations(Mat& gram, const Mat& rhs, const CalibrationConfig& cfg) {
    double ridge = cfg.ridge;
    if (ridge < 0.0) ridge = 1e-8 * gram.diagonal().real().mean();
    gram.diagonal().array() += ridge;
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success)
        throw CalibrationError("calibrate: Cholesky factorization failed",
                               std::numeric_limits<double>::infinity());
    Mat x = llt.solve(rhs);
    double worst = 0.0;
    for (Eigen::Index col = 0; col < rhs.cols(); ++col) {
        const double b_norm = rhs.col(col).norm();
        if (b_norm == 0.0) {
            x.col(col).setZero();
            continue;
        }
        double rel = std::numeric_limits<double>::infinity();
        for (int it = 0; it < std::max(1, cfg.max_iterations); ++it) {
            const auto residual = (rhs.col(col) - gram * x.col(col)).eval();
            rel = residual.norm() / b_norm;
            if (rel <= cfg.tolerance) break;
            x.col(col) += llt.solve(residual);
            rel = (rhs.col(col) - gram * x.col(col)).norm() / b_norm;
        }
        worst = std::max(worst, rel);
    }
    if (worst > cfg.tolerance)
        throw CalibrationError("calibrate: normal-equation residual did not reach tolerance",
                               worst);
    return x;
}

}  // namespace

FirEstimator calibrate(const ControlTrace& trace,
                       const std::vector<std::vector<double>>& references,
                       const CalibrationConfig& cfg) {
    if (references.empty())
        throw std::invalid_argument("calibrate: at least one reference required");
    if (cfg.taps_per_channel < 2 || cfg.taps_per_channel % 2 != 0)
        throw std::invalid_argument("calibrate: taps_per_channel must be even and >= 2");
    for (const auto& ref : references)
        if (static_cast<long long>(ref.size()) != trace.length)
            throw std::invalid_argument("calibrate: reference length does not match trace");
    // Over-determination gate: at least 4 samples per unknown.
    if (trace.length < 4LL * cfg.taps_per_channel * trace.channels)
        throw std::invalid_argument(
            "calibrate: under-determined (need train length >= 4 * taps * channels)");

    const long long length = trace.length;
    const int taps = cfg.taps_per_channel;
    const int delay = taps / 2;
    const bool weighted = cfg.weight_f_hi > cfg.weight_f_lo;
    const bool paired = cfg.pair_channels && references.size() == 2 &&
                        trace.channels % 2 == 0 && trace.channels >= 2;
    // Normalized band edges in cycles per sample.
    const double f_lo = cfg.weight_f_lo * trace.period;
    const double f_hi = cfg.weight_f_hi * trace.period;

    FirEstimator fir;
    fir.n_outputs = static_cast<int>(references.size());
    fir.n_channels = trace.channels;
    fir.taps_per_channel = taps;
    fir.delay = delay;
    fir.taps.assign(static_cast<std::size_t>(fir.n_outputs) * trace.channels * taps, 0.0);

    int half_len = 0;
    std::vector<cd> prefilter;
    if (weighted)
        prefilter = paired ? complex_bandpass(f_lo, f_hi, half_len)
                           : real_bandpass(f_lo, f_hi, half_len);
    const long long k0 = delay + half_len;
    const long long k1 = length - delay - half_len;
    const int n_fit = paired ? trace.channels / 2 : trace.channels;
    if (k1 - k0 < static_cast<long long>(n_fit) * taps)
        throw std::invalid_argument(
            "calibrate: interior window too short for the tap count");

    detail::ComplexFft fft(detail::next_pow2(
        static_cast<std::size_t>(length) + prefilter.size() + 2 * taps));
    std::vector<cd> g_spec;
    if (weighted) g_spec = fft.forward(prefilter);
    auto maybe_filter = [&](std::vector<cd>&& x) {
        return weighted ? apply_prefilter(fft, g_spec, x, half_len) : std::move(x);
    };

    if (paired) {
        const int n = trace.channels / 2;
        std::vector<std::vector<cd>> streams(n);
        for (int l = 0; l < n; ++l) {
            std::vector<cd> c(length);
            for (long long k = 0; k < length; ++k)
                c[k] = cd(trace.at(l, k), trace.at(n + l, k));
            streams[l] = maybe_filter(std::move(c));
        }
        std::vector<cd> ref(length);
        for (long long k = 0; k < length; ++k)
            ref[k] = cd(references[0][k], references[1][k]);
        ref = maybe_filter(std::move(ref));

        Eigen::MatrixXcd gram = assemble_gram(fft, streams, taps, delay, k0, k1);
        Eigen::MatrixXcd rhs = assemble_rhs(fft, streams, ref, taps, delay, k0, k1);
        const Eigen::MatrixXcd sol = solve_normal_equations(gram, rhs, cfg);
        // Complex tap h on complex channel s_l + i*s_{n+l} producing the
        // complex estimate u + i*ubar, expanded to the real bank.
        for (int l = 0; l < n; ++l)
            for (int m = 0; m < taps; ++m) {
                const cd h = sol(l * taps + m, 0);
                fir.tap(0, l, m) = h.real();
                fir.tap(0, n + l, m) = -h.imag();
                fir.tap(1, l, m) = h.imag();
                fir.tap(1, n + l, m) = h.real();
            }
        return fir;
    }

    std::vector<std::vector<cd>> streams(trace.channels);
    for (int ch = 0; ch < trace.channels; ++ch) {
        std::vector<cd> c(length);
        for (long long k = 0; k < length; ++k) c[k] = cd(trace.at(ch, k), 0.0);
        streams[ch] = maybe_filter(std::move(c));
    }
    // Real streams and a real prefilter give a real Gram; a single
    // factorization serves every output.
    Eigen::MatrixXd gram =
        assemble_gram(fft, streams, taps, delay, k0, k1).real();
    Eigen::MatrixXd rhs(gram.rows(), fir.n_outputs);
    for (int out = 0; out < fir.n_outputs; ++out) {
        std::vector<cd> ref(length);
        for (long long k = 0; k < length; ++k) ref[k] = cd(references[out][k], 0.0);
        ref = maybe_filter(std::move(ref));
        rhs.col(out) = assemble_rhs(fft, streams, ref, taps, delay, k0, k1).real();
    }
    const Eigen::MatrixXd sol = solve_normal_equations(gram, rhs, cfg);
    for (int out = 0; out < fir.n_outputs; ++out)
        for (int ch = 0; ch < trace.channels; ++ch)
            for (int m = 0; m < taps; ++m)
                fir.tap(out, ch, m) = sol(ch * taps + m, out);
    return fir;
}

std::vector<std::vector<double>> estimate(const ControlTrace& trace,
                                          const FirEstimator& fir) {
    if (trace.channels != fir.n_channels)
        throw std::invalid_argument("estimate: channel count mismatch");
    if (trace.length <= fir.taps_per_channel)
        throw std::invalid_argument("estimate: trace shorter than the tap window");

    ConvOperator op(trace, fir.taps_per_channel);
    const long long out_len = trace.length - fir.taps_per_channel;
    std::vector<std::vector<double>> outputs(fir.n_outputs);
    std::vector<double> h(static_cast<std::size_t>(fir.n_channels) * fir.taps_per_channel);
    std::vector<double> y;
    for (int out = 0; out < fir.n_outputs; ++out) {
        std::copy(fir.taps.begin() + static_cast<std::size_t>(out) * h.size(),
                  fir.taps.begin() + static_cast<std::size_t>(out + 1) * h.size(),
                  h.begin());
        op.forward(h, y);
        outputs[out].assign(y.begin() + fir.delay, y.begin() + fir.delay + out_len);
    }
    return outputs;
}

std::vector<std::complex<double>> estimate_complex(const ControlTrace& trace,
                                                   const FirEstimator& fir) {
    if (fir.n_outputs < 2)
        throw std::invalid_argument("estimate_complex: needs two output channels");
    auto outs = estimate(trace, fir);
    std::vector<std::complex<double>> z(outs[0].size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = {outs[0][i], outs[1][i]};
    return z;
}

}  // namespace qcbadc
