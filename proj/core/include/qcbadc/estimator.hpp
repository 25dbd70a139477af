#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "qcbadc/sim.hpp"

namespace qcbadc {

/// Noncausal FIR reconstruction bank: n_outputs estimates formed from
/// n_channels +-1 control streams, taps_per_channel taps each.
///
/// The estimate at time index k uses decisions k - delay .. k + delay - 1
/// with delay = taps_per_channel / 2; tap index m addresses the decision at
/// relative offset m - delay.
struct FirEstimator {
    int n_outputs = 0;
    int n_channels = 0;
    int taps_per_channel = 0;  ///< even
    int delay = 0;             ///< taps_per_channel / 2

    std::vector<double> taps;  ///< [output][channel][m]

    double tap(int out, int ch, int m) const {
        return taps[(static_cast<std::size_t>(out) * n_channels + ch) * taps_per_channel + m];
    }
    double& tap(int out, int ch, int m) {
        return taps[(static_cast<std::size_t>(out) * n_channels + ch) * taps_per_channel + m];
    }
};

struct CalibrationConfig {
    int taps_per_channel = 512;  ///< even
    double ridge = -1.0;  ///< < 0 selects 1e-8 * the mean Gram diagonal
    double tolerance = 1e-6;  ///< relative normal-equation residual after refinement
    int max_iterations = 8;   ///< iterative-refinement passes on the solve

    /// With exactly two references and an even channel count, fold channel
    /// pairs (l, n+l) into single complex channels and fit one bank of
    /// complex taps against the complex reference ref[0] + i*ref[1]. This
    /// halves the unknown count and enforces the phase symmetry between the
    /// in-phase and quadrature paths.
    bool pair_channels = true;

    /// Optional frequency weighting: when weight_f_hi > weight_f_lo, the
    /// streams and references are band-pass prefiltered to [weight_f_lo,
    /// weight_f_hi] (Hz; the paired complex fit uses that one-sided band,
    /// the real fit its mirror image too) before the least-squares fit.
    /// Fitting in-band only keeps the huge out-of-band quantization noise
    /// from polluting the tap estimates; the defaults (0, 0) give the plain
    /// unweighted objective.
    double weight_f_lo = 0.0;
    double weight_f_hi = 0.0;
};

struct CalibrationError : std::runtime_error {
    double achieved_residual;
    CalibrationError(const std::string& what, double residual)
        : std::runtime_error(what), achieved_residual(residual) {}
};

/// Least-squares fit of the tap bank against known reference sequences
/// (one per output, sampled at the control clock and aligned with the
/// trace). Minimizes the reconstruction error over the interior window
/// (delay samples, plus the prefilter half-length when weighting is on,
/// dropped at each edge) plus a ridge penalty. The normal equations are
/// assembled exactly with FFT cross-correlations and solved directly by
/// Cholesky factorization with iterative refinement; throws
/// CalibrationError if the refined residual misses cfg.tolerance.
FirEstimator calibrate(const ControlTrace& trace,
                       const std::vector<std::vector<double>>& references,
                       const CalibrationConfig& cfg);

/// Apply the bank; output sequences have length trace.length -
/// taps_per_channel, sample j corresponding to trace index j + delay.
std::vector<std::vector<double>> estimate(const ControlTrace& trace,
                                          const FirEstimator& fir);

/// Pair the first two outputs as u_hat + i * ubar_hat.
std::vector<std::complex<double>> estimate_complex(const ControlTrace& trace,
                                                   const FirEstimator& fir);

}  // namespace qcbadc
