#pragma once

#include <Eigen/Dense>

namespace qcbadc {

/// Design targets for a quadrature leapfrog converter.
///
/// All frequencies are in Hz; the control clock runs at fs_hz and the
/// conversion band of width fs_hz / (2 * osr) is centered on fn_hz.
struct DesignSpec {
    int n = 6;                ///< per-branch loop order
    double osr = 8.0;         ///< oversampling ratio, >= 1
    double fs_hz = 1.0;       ///< control clock frequency
    double fn_hz = 0.125;     ///< notch (band center) frequency, in [0, fs/2)
    double phi_kappa = 0.0;   ///< free phase of the control rotation, [0, 2*pi)
    double tau_dc = 0.0;      ///< quantizer delay, in [0, T)
    double v_fs = 1.0;        ///< full-scale input amplitude

    /// Throws std::invalid_argument if any field is out of range.
    void validate() const;
};

/// N-th order low-pass leapfrog ladder: forward gain beta, feedback gain
/// alpha, angular bandwidth omega_b, control period.
struct LowpassLeapfrog {
    int n = 1;
    double beta = 0.0;     ///< 1/s, positive by convention
    double alpha = 0.0;    ///< 1/s, negative by convention
    double omega_b = 0.0;  ///< rad/s
    double period = 1.0;   ///< s
};

/// Two leapfrog branches cross-coupled by +-omega_n.
struct QuadratureSystem {
    int n = 1;             ///< per-branch order; state dimension is 2n
    double omega_n = 0.0;  ///< rad/s
    Eigen::MatrixXd a;     ///< 2n x 2n state matrix
    Eigen::MatrixXd b;     ///< 2n x 2 input matrix
    LowpassLeapfrog lowpass;
};

/// Closed-form leapfrog design: omega_b = pi*fs/(2*osr), beta = fs/2,
/// alpha = -omega_b^2 / (4*beta), period = 1/fs.
LowpassLeapfrog design_lowpass(const DesignSpec& spec);

/// State-space matrices of the ladder: alpha on the superdiagonal, beta on
/// the subdiagonal, input enters the first stage with gain beta.
void lowpass_matrices(const LowpassLeapfrog& sys, Eigen::MatrixXd& a_lp,
                      Eigen::VectorXd& b_lp);

/// Stack two copies of the ladder and couple them with +-omega_n * I.
QuadratureSystem quadrature_transform(const LowpassLeapfrog& sys, double omega_n);

/// Predicted SNR change in dB when the effective OSR is scaled by osr_ratio,
/// from the (OSR)^(2N) proportionality: 20 * n * log10(osr_ratio).
double predicted_snr_delta_db(int n, double osr_ratio);

}  // namespace qcbadc
