#pragma once

#include <array>

namespace qcbadc {

/// Gains of one local quadrature digital control.
///
/// (kappa, kappa_bar) scale the NRZ feedback contribution and
/// (kappa_tilde, kappa_bar_tilde) form the rotated observation that is
/// quantized; both pairs act as scaled 2x2 rotations on a state pair.
struct ControlCoefficients {
    double kappa = 0.0;            ///< 1/s
    double kappa_bar = 0.0;        ///< 1/s
    double kappa_tilde = 0.0;      ///< unitless
    double kappa_bar_tilde = 0.0;  ///< unitless
    double phi_kappa = 0.0;        ///< rad
    double period = 1.0;           ///< s
    double tau_dc = 0.0;           ///< s
};

/// Closed-form control synthesis.
///
/// The common magnitude beta*T*omega_n / (2*sin(omega_n*T/2)) degenerates to
/// 0/0 at omega_n = 0 and is replaced by its limit beta when
/// |omega_n * period| < 1e-8.
ControlCoefficients synthesize_control(double beta, double omega_n, double period,
                                       double phi_kappa, double tau_dc);

/// Worst-case superposition bound: true iff 2*beta*period <= 1.
bool check_superposition(double beta, double period);

/// [[kt, -kbt], [kbt, kt]] applied to a state pair.
std::array<double, 2> control_observation(const std::array<double, 2>& state_pair,
                                          const ControlCoefficients& c);

/// Elementwise 1-bit quantization; sign(0) = +1.
std::array<int, 2> quantize(const std::array<double, 2>& observation);

/// [[k, -kb], [kb, k]] applied to a +-1 decision pair; the result is held
/// constant over one NRZ interval.
std::array<double, 2> control_contribution(const std::array<int, 2>& decisions,
                                           const ControlCoefficients& c);

}  // namespace qcbadc
