#include "qcbadc/control.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcbadc {

ControlCoefficients synthesize_control(double beta, double omega_n, double period,
                                       double phi_kappa, double tau_dc) {
    if (!(beta * period > 0.0))
        throw std::invalid_argument("synthesize_control: beta*period must be > 0");
    const double wt = omega_n * period;
    if (wt < 0.0 || wt >= 2.0 * std::numbers::pi)
        throw std::invalid_argument("synthesize_control: omega_n*period must lie in [0, 2*pi)");

    // beta*T*omega_n / (2*sin(omega_n*T/2)), with limit beta at omega_n = 0.
    double gain;
    if (std::abs(wt) < 1e-8) {
        gain = beta;
    } else {
        gain = beta * period * omega_n / (2.0 * std::sin(wt / 2.0));
    }
    const double angle = omega_n * (period / 2.0 + tau_dc) - phi_kappa;

    ControlCoefficients c;
    c.kappa = gain * std::cos(phi_kappa);
    c.kappa_bar = gain * std::sin(phi_kappa);
    c.kappa_tilde = -std::cos(angle) / (beta * period);
    c.kappa_bar_tilde = -std::sin(angle) / (beta * period);
    c.phi_kappa = phi_kappa;
    c.period = period;
    c.tau_dc = tau_dc;
    return c;
}

bool check_superposition(double beta, double period) {
    return 2.0 * beta * period <= 1.0;
}

std::array<double, 2> control_observation(const std::array<double, 2>& state_pair,
                                          const ControlCoefficients& c) {
    return {c.kappa_tilde * state_pair[0] - c.kappa_bar_tilde * state_pair[1],
            c.kappa_bar_tilde * state_pair[0] + c.kappa_tilde * state_pair[1]};
}

std::array<int, 2> quantize(const std::array<double, 2>& observation) {
    if (!std::isfinite(observation[0]) || !std::isfinite(observation[1]))
        throw std::domain_error("quantize: non-finite control observation");
    return {observation[0] >= 0.0 ? 1 : -1, observation[1] >= 0.0 ? 1 : -1};
}

std::array<double, 2> control_contribution(const std::array<int, 2>& decisions,
                                           const ControlCoefficients& c) {
    return {c.kappa * decisions[0] - c.kappa_bar * decisions[1],
            c.kappa_bar * decisions[0] + c.kappa * decisions[1]};
}

}  // namespace qcbadc
