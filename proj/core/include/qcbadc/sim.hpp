#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qcbadc/control.hpp"
#include "qcbadc/system.hpp"

namespace qcbadc {

/// Quadrature test tone: u(t) = A*cos(2*pi*f*t + phase) paired with
/// ubar(t) = A*sin(2*pi*f*t + phase).
struct InputSignal {
    double amplitude = 1.0;
    double frequency_hz = 0.0;
    double phase = 0.0;

    double in_phase(double t) const;
    double quadrature(double t) const;
};

/// Sum of quadrature tones; u(t) and ubar(t) are the real and imaginary
/// parts of the complex envelope. Used as a wideband training input.
struct MultiTone {
    std::vector<InputSignal> tones;

    double in_phase(double t) const;
    double quadrature(double t) const;
    /// Peak bound sum_j |a_j|, used for the instability threshold.
    double amplitude() const;
};

struct SimConfig {
    long long num_periods = 1LL << 14;
    int substeps = 32;                    ///< integration substeps per control period
    Eigen::VectorXd initial_state;        ///< empty means zero
    double instability_threshold = 10.0;  ///< in multiples of the input amplitude
    bool record_states = false;           ///< keep the per-period state samples
    enum class Scheme { rk4, exact } scheme = Scheme::rk4;

    void validate() const;
};

/// The +-1 control decisions, one column per control period.
/// Channel order is (s_1..s_N, sbar_1..sbar_N) for quadrature runs.
struct ControlTrace {
    int channels = 0;
    long long length = 0;
    double period = 1.0;
    std::vector<std::int8_t> decisions;  // period-major: decisions[k*channels + ch]

    std::int8_t at(int channel, long long k) const {
        return decisions[static_cast<std::size_t>(k) * channels + channel];
    }
    /// One channel as a +-1.0 double sequence.
    std::vector<double> channel(int ch) const;
};

struct SimOutput {
    ControlTrace trace;
    double max_state_inf_norm = 0.0;
    bool stable = true;
    std::vector<Eigen::VectorXd> states;  // per-period samples when recorded
};

/// Raised when the state vector becomes non-finite.
struct SimDivergedError : std::runtime_error {
    long long period_index;
    explicit SimDivergedError(long long k)
        : std::runtime_error("simulation diverged (non-finite state) at period " +
                             std::to_string(k)),
          period_index(k) {}
};

/// Per-stage control gains; nominal runs use the same values for every
/// stage, Monte-Carlo runs perturb them independently.
struct StageControl {
    double kappa = 0.0;
    double kappa_bar = 0.0;
    double kappa_tilde = 0.0;
    double kappa_bar_tilde = 0.0;
};

/// A concrete simulatable quadrature loop: state matrices plus the N local
/// control gains. Decoupled from QuadratureSystem so that perturbed
/// instances (whose matrix entries no longer share single alpha/beta/omega_n
/// values) run through the same simulator.
struct QuadratureInstance {
    int n = 1;             ///< stages per branch; state dimension 2n
    Eigen::MatrixXd a;     ///< 2n x 2n
    Eigen::MatrixXd b;     ///< 2n x 2
    std::vector<StageControl> stages;  ///< size n
    double period = 1.0;
    double tau_dc = 0.0;
};

QuadratureInstance make_instance(const QuadratureSystem& sys,
                                 const ControlCoefficients& ctrl);

SimOutput simulate(const QuadratureInstance& inst, const InputSignal& input,
                   const SimConfig& cfg);
SimOutput simulate(const QuadratureInstance& inst, const MultiTone& input,
                   const SimConfig& cfg);
SimOutput simulate(const QuadratureSystem& sys, const ControlCoefficients& ctrl,
                   const InputSignal& input, const SimConfig& cfg);

/// The low-pass building block: N states, scalar per-stage control with
/// observation gain -1/(beta*T) and contribution gain beta.
struct LowpassInstance {
    int n = 1;
    Eigen::MatrixXd a;  ///< n x n
    Eigen::VectorXd b;  ///< n
    std::vector<double> kappa;        ///< contribution gain per stage
    std::vector<double> kappa_tilde;  ///< observation gain per stage
    double period = 1.0;
    double tau_dc = 0.0;
};

LowpassInstance make_lowpass_instance(const LowpassLeapfrog& sys);

/// Which component of the quadrature tone drives a low-pass run.
enum class ToneComponent { in_phase, quadrature };

SimOutput simulate_lowpass(const LowpassInstance& inst, const InputSignal& input,
                           const SimConfig& cfg,
                           ToneComponent component = ToneComponent::in_phase);
SimOutput simulate_lowpass(const LowpassInstance& inst, const MultiTone& input,
                           const SimConfig& cfg,
                           ToneComponent component = ToneComponent::in_phase);

/// One integration substep under a drive held constant over [0, h].
/// The exact scheme evaluates exp(a*h)*x + integral(exp(a*s)) * drive via an
/// augmented matrix exponential; rk4 is the classical fourth-order step.
Eigen::VectorXd step_reference(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& drive, double h,
                               SimConfig::Scheme scheme = SimConfig::Scheme::exact);

}  // namespace qcbadc
