#include "qcbadc/sim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace qcbadc {

double InputSignal::in_phase(double t) const {
    return amplitude * std::cos(2.0 * std::numbers::pi * frequency_hz * t + phase);
}

double InputSignal::quadrature(double t) const {
    return amplitude * std::sin(2.0 * std::numbers::pi * frequency_hz * t + phase);
}

double MultiTone::in_phase(double t) const {
    double acc = 0.0;
    for (const InputSignal& tone : tones) acc += tone.in_phase(t);
    return acc;
}

double MultiTone::quadrature(double t) const {
    double acc = 0.0;
    for (const InputSignal& tone : tones) acc += tone.quadrature(t);
    return acc;
}

double MultiTone::amplitude() const {
    double acc = 0.0;
    for (const InputSignal& tone : tones) acc += std::abs(tone.amplitude);
    return acc;
}

void SimConfig::validate() const {
    if (num_periods < 1) throw std::invalid_argument("SimConfig: num_periods must be >= 1");
    if (substeps < 1) throw std::invalid_argument("SimConfig: substeps must be >= 1");
    if (!(instability_threshold > 1.0))
        throw std::invalid_argument("SimConfig: instability_threshold must be > 1");
}

std::vector<double> ControlTrace::channel(int ch) const {
    std::vector<double> out(static_cast<std::size_t>(length));
    for (long long k = 0; k < length; ++k) out[k] = at(ch, k);
    return out;
}

QuadratureInstance make_instance(const QuadratureSystem& sys,
                                 const ControlCoefficients& ctrl) {
    QuadratureInstance inst;
    inst.n = sys.n;
    inst.a = sys.a;
    inst.b = sys.b;
    inst.stages.assign(sys.n, StageControl{ctrl.kappa, ctrl.kappa_bar,
                                           ctrl.kappa_tilde, ctrl.kappa_bar_tilde});
    inst.period = ctrl.period;
    inst.tau_dc = ctrl.tau_dc;
    return inst;
}

LowpassInstance make_lowpass_instance(const LowpassLeapfrog& sys) {
    LowpassInstance inst;
    inst.n = sys.n;
    lowpass_matrices(sys, inst.a, inst.b);
    inst.kappa.assign(sys.n, sys.beta);
    inst.kappa_tilde.assign(sys.n, -1.0 / (sys.beta * sys.period));
    inst.period = sys.period;
    inst.tau_dc = 0.0;
    return inst;
}

namespace {

// Fixed-order dense kernel shared by the quadrature and low-pass paths.
// Plain ascending loops keep the summation order identical between a 2N
// system with zero coupling blocks and two independent N systems, which the
// decoupling guarantee relies on.
struct Integrator {
    int dim;
    std::vector<double> a;       // row-major dim x dim
    std::vector<double> b0, b1;  // input columns; b1 empty for one input
    std::vector<double> contrib;
    std::vector<double> k1, k2, k3, k4, xt;

    explicit Integrator(const Eigen::MatrixXd& am, const Eigen::MatrixXd& bm)
        : dim(static_cast<int>(am.rows())),
          a(dim * dim),
          b0(dim),
          contrib(dim, 0.0),
          k1(dim), k2(dim), k3(dim), k4(dim), xt(dim) {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a[i * dim + j] = am(i, j);
        for (int i = 0; i < dim; ++i) b0[i] = bm(i, 0);
        if (bm.cols() > 1) {
            b1.resize(dim);
            for (int i = 0; i < dim; ++i) b1[i] = bm(i, 1);
        }
    }

    void deriv(const double* x, double u, double ub, double* dx) const {
        for (int i = 0; i < dim; ++i) {
            double acc = 0.0;
            const double* row = &a[static_cast<std::size_t>(i) * dim];
            for (int j = 0; j < dim; ++j) acc += row[j] * x[j];
            acc += b0[i] * u;
            if (!b1.empty()) acc += b1[i] * ub;
            acc += contrib[i];
            dx[i] = acc;
        }
    }

    // One classical RK4 step over width h; u/ub hold the drive sampled at
    // half-substep spacing, indexed so that u[j], u[j+1], u[j+2] are the
    // start, midpoint and end values for this substep.
    void step_rk4(std::vector<double>& x, const double* u, const double* ub, int j,
                  double h) {
        deriv(x.data(), u[j], ub[j], k1.data());
        for (int i = 0; i < dim; ++i) xt[i] = x[i] + (h / 2.0) * k1[i];
        deriv(xt.data(), u[j + 1], ub[j + 1], k2.data());
        for (int i = 0; i < dim; ++i) xt[i] = x[i] + (h / 2.0) * k2[i];
        deriv(xt.data(), u[j + 1], ub[j + 1], k3.data());
        for (int i = 0; i < dim; ++i) xt[i] = x[i] + h * k3[i];
        deriv(xt.data(), u[j + 2], ub[j + 2], k4.data());
        for (int i = 0; i < dim; ++i)
            x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    // Exact transition with the drive frozen at the substep start.
    void step_exact(std::vector<double>& x, const Eigen::MatrixXd& phi,
                    const Eigen::MatrixXd& psi, double u, double ub) {
        for (int i = 0; i < dim; ++i) {
            double d = b0[i] * u;
            if (!b1.empty()) d += b1[i] * ub;
            xt[i] = d + contrib[i];
        }
        std::vector<double> next(dim, 0.0);
        for (int i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (int j = 0; j < dim; ++j)
                acc += phi(i, j) * x[j] + psi(i, j) * xt[j];
            next[i] = acc;
        }
        x = std::move(next);
    }
};

// Samples the tone sum on one control period's stage grid (half-substep
// spacing, two segments when the quantizer delay splits the period). Each
// tone is an exact complex oscillator re-seeded with sin/cos at the period
// start and advanced by unit-magnitude rotations within the period, so the
// per-sample cost is one complex multiply per tone with no phase drift
// across periods.
class DriveSampler {
  public:
    DriveSampler(const std::vector<InputSignal>& tones, int m1, double h1, int m2,
                 double h2, double tau_dc)
        : tones_(tones), m1_(m1), m2_(m2), tau_dc_(tau_dc) {
        const int points = (m1 > 0 ? 2 * m1 + 1 : 0) + 2 * m2 + 1;
        u_.resize(points);
        ub_.resize(points);
        rot1_.reserve(tones.size());
        rot2_.reserve(tones.size());
        for (const InputSignal& tone : tones) {
            const double w = 2.0 * std::numbers::pi * tone.frequency_hz;
            rot1_.push_back(std::polar(1.0, w * h1 / 2.0));
            rot2_.push_back(std::polar(1.0, w * h2 / 2.0));
        }
    }

    // Segment sample offsets within the buffers.
    int seg1() const { return 0; }
    int seg2() const { return m1_ > 0 ? 2 * m1_ + 1 : 0; }
    const double* u() const { return u_.data(); }
    const double* ub() const { return ub_.data(); }

    void fill(double t0) {
        std::fill(u_.begin(), u_.end(), 0.0);
        std::fill(ub_.begin(), ub_.end(), 0.0);
        for (std::size_t l = 0; l < tones_.size(); ++l) {
            const InputSignal& tone = tones_[l];
            const double w = 2.0 * std::numbers::pi * tone.frequency_hz;
            auto seed = [&](double t) {
                const double th = w * t + tone.phase;
                return std::complex<double>(tone.amplitude * std::cos(th),
                                            tone.amplitude * std::sin(th));
            };
            std::complex<double> z = seed(t0);
            if (m1_ > 0) {
                for (int j = 0; j <= 2 * m1_; ++j) {
                    u_[j] += z.real();
                    ub_[j] += z.imag();
                    if (j < 2 * m1_) z *= rot1_[l];
                }
                z = seed(t0 + tau_dc_);
            }
            const int base = seg2();
            for (int j = 0; j <= 2 * m2_; ++j) {
                u_[base + j] += z.real();
                ub_[base + j] += z.imag();
                if (j < 2 * m2_) z *= rot2_[l];
            }
        }
    }

  private:
    const std::vector<InputSignal>& tones_;
    int m1_, m2_;
    double tau_dc_;
    std::vector<double> u_, ub_;
    std::vector<std::complex<double>> rot1_, rot2_;
};

// phi = exp(a*h), psi = integral_0^h exp(a*s) ds, via an augmented exponential.
void transition_pair(const Eigen::MatrixXd& a, double h, Eigen::MatrixXd& phi,
                     Eigen::MatrixXd& psi) {
    const int d = static_cast<int>(a.rows());
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    aug.topLeftCorner(d, d) = a * h;
    aug.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d) * h;
    Eigen::MatrixXd e = aug.exp();
    phi = e.topLeftCorner(d, d);
    psi = e.topRightCorner(d, d);
}

template <typename SampleFn, typename ContribFn>
SimOutput run_loop(Integrator& integ, int n_channels,
                   const std::vector<InputSignal>& tones, double input_amplitude,
                   const SimConfig& cfg, double period, double tau_dc,
                   SampleFn&& sample, ContribFn&& make_contrib) {
    cfg.validate();
    const int dim = integ.dim;
    std::vector<double> x(dim, 0.0);
    if (cfg.initial_state.size() > 0) {
        if (cfg.initial_state.size() != dim)
            throw std::invalid_argument("SimConfig: initial_state dimension mismatch");
        for (int i = 0; i < dim; ++i) x[i] = cfg.initial_state(i);
    }

    SimOutput out;
    out.trace.channels = n_channels;
    out.trace.period = period;
    out.trace.decisions.reserve(static_cast<std::size_t>(cfg.num_periods) * n_channels);

    const double limit = cfg.instability_threshold * input_amplitude;
    const int m = cfg.substeps;
    const bool exact = cfg.scheme == SimConfig::Scheme::exact;
    const bool delayed = tau_dc > 0.0;

    // Substep partition; with a quantizer delay the period splits at tau_dc.
    int m1 = 0, m2 = m;
    double h1 = 0.0, h2 = period / m;
    if (delayed) {
        m1 = std::clamp(static_cast<int>(std::ceil(m * tau_dc / period)), 1,
                        std::max(m - 1, 1));
        m2 = std::max(m - m1, 1);
        h1 = tau_dc / m1;
        h2 = (period - tau_dc) / m2;
    }

    Eigen::MatrixXd phi1, psi1, phi2, psi2;
    if (exact) {
        Eigen::MatrixXd a_eig(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a_eig(i, j) = integ.a[i * dim + j];
        if (delayed) transition_pair(a_eig, h1, phi1, psi1);
        transition_pair(a_eig, h2, phi2, psi2);
    }

    DriveSampler drive(tones, delayed ? m1 : 0, h1, m2, h2, tau_dc);
    long long completed = 0;
    for (long long k = 0; k < cfg.num_periods; ++k) {
        const double t0 = k * period;
        drive.fill(t0);

        // Sample the observations at the clock edge and store the decisions.
        double norm = 0.0;
        for (int i = 0; i < dim; ++i) norm = std::max(norm, std::abs(x[i]));
        if (!std::isfinite(norm)) throw SimDivergedError(k);
        sample(x.data(), out.trace.decisions);
        if (cfg.record_states) {
            Eigen::VectorXd xs(dim);
            for (int i = 0; i < dim; ++i) xs(i) = x[i];
            out.states.push_back(std::move(xs));
        }

        const double* u = drive.u();
        const double* ub = drive.ub();
        const long long base = completed * n_channels;
        if (delayed) {
            // Old contribution holds over [kT, kT + tau_dc).
            for (int s = 0; s < m1; ++s) {
                if (exact)
                    integ.step_exact(x, phi1, psi1, u[2 * s], ub[2 * s]);
                else
                    integ.step_rk4(x, u, ub, 2 * s, h1);
            }
            make_contrib(&out.trace.decisions[base], integ.contrib.data());
            const int b2i = drive.seg2();
            for (int s = 0; s < m2; ++s) {
                if (exact)
                    integ.step_exact(x, phi2, psi2, u[b2i + 2 * s], ub[b2i + 2 * s]);
                else
                    integ.step_rk4(x, u + b2i, ub + b2i, 2 * s, h2);
            }
        } else {
            make_contrib(&out.trace.decisions[base], integ.contrib.data());
            for (int s = 0; s < m2; ++s) {
                if (exact)
                    integ.step_exact(x, phi2, psi2, u[2 * s], ub[2 * s]);
                else
                    integ.step_rk4(x, u, ub, 2 * s, h2);
            }
        }
        ++completed;

        for (int i = 0; i < dim; ++i) {
            const double v = std::abs(x[i]);
            if (v > out.max_state_inf_norm) out.max_state_inf_norm = v;
        }
        if (!std::isfinite(out.max_state_inf_norm)) throw SimDivergedError(k);
        if (out.max_state_inf_norm > limit) {
            out.stable = false;
            break;
        }
    }
    out.trace.length = completed;
    out.trace.decisions.resize(static_cast<std::size_t>(completed) * n_channels);
    return out;
}

SimOutput simulate_quadrature_impl(const QuadratureInstance& inst,
                                   const std::vector<InputSignal>& tones,
                                   double input_amplitude, const SimConfig& cfg) {
    const int n = inst.n;
    Integrator integ(inst.a, inst.b);

    auto sample = [&](const double* x, std::vector<std::int8_t>& dec) {
        // In-phase decisions first, then quadrature, matching channel order.
        for (int l = 0; l < n; ++l) {
            const StageControl& c = inst.stages[l];
            const double obs = c.kappa_tilde * x[l] - c.kappa_bar_tilde * x[n + l];
            if (!std::isfinite(obs)) throw SimDivergedError(dec.size() / (2 * n));
            dec.push_back(obs >= 0.0 ? 1 : -1);
        }
        for (int l = 0; l < n; ++l) {
            const StageControl& c = inst.stages[l];
            const double obs = c.kappa_bar_tilde * x[l] + c.kappa_tilde * x[n + l];
            if (!std::isfinite(obs)) throw SimDivergedError(dec.size() / (2 * n));
            dec.push_back(obs >= 0.0 ? 1 : -1);
        }
    };
    auto make_contrib = [&](const std::int8_t* dec, double* contrib) {
        for (int l = 0; l < n; ++l) {
            const StageControl& c = inst.stages[l];
            const double s = dec[l];
            const double sb = dec[n + l];
            contrib[l] = c.kappa * s - c.kappa_bar * sb;
            contrib[n + l] = c.kappa_bar * s + c.kappa * sb;
        }
    };
    return run_loop(integ, 2 * n, tones, input_amplitude, cfg, inst.period,
                    inst.tau_dc, sample, make_contrib);
}

SimOutput simulate_lowpass_impl(const LowpassInstance& inst,
                                const std::vector<InputSignal>& tones,
                                double input_amplitude, const SimConfig& cfg,
                                ToneComponent component) {
    const int n = inst.n;
    auto sample = [&](const double* x, std::vector<std::int8_t>& dec) {
        for (int l = 0; l < n; ++l) {
            const double obs = inst.kappa_tilde[l] * x[l];
            if (!std::isfinite(obs)) throw SimDivergedError(dec.size() / n);
            dec.push_back(obs >= 0.0 ? 1 : -1);
        }
    };
    auto make_contrib = [&](const std::int8_t* dec, double* contrib) {
        for (int l = 0; l < n; ++l) contrib[l] = inst.kappa[l] * dec[l];
    };
    if (component == ToneComponent::in_phase) {
        Integrator integ(inst.a, inst.b);
        return run_loop(integ, n, tones, input_amplitude, cfg, inst.period,
                        inst.tau_dc, sample, make_contrib);
    }
    // Drive with the quadrature tone component by moving B to the second
    // input column.
    Eigen::MatrixXd b2 = Eigen::MatrixXd::Zero(n, 2);
    b2.col(1) = inst.b;
    Integrator integ(inst.a, b2);
    return run_loop(integ, n, tones, input_amplitude, cfg, inst.period,
                    inst.tau_dc, sample, make_contrib);
}

}  // namespace

SimOutput simulate(const QuadratureInstance& inst, const InputSignal& input,
                   const SimConfig& cfg) {
    return simulate_quadrature_impl(inst, {input}, input.amplitude, cfg);
}

SimOutput simulate(const QuadratureInstance& inst, const MultiTone& input,
                   const SimConfig& cfg) {
    return simulate_quadrature_impl(inst, input.tones, input.amplitude(), cfg);
}

SimOutput simulate(const QuadratureSystem& sys, const ControlCoefficients& ctrl,
                   const InputSignal& input, const SimConfig& cfg) {
    return simulate(make_instance(sys, ctrl), input, cfg);
}

SimOutput simulate_lowpass(const LowpassInstance& inst, const InputSignal& input,
                           const SimConfig& cfg, ToneComponent component) {
    return simulate_lowpass_impl(inst, {input}, input.amplitude, cfg, component);
}

SimOutput simulate_lowpass(const LowpassInstance& inst, const MultiTone& input,
                           const SimConfig& cfg, ToneComponent component) {
    return simulate_lowpass_impl(inst, input.tones, input.amplitude(), cfg, component);
}

Eigen::VectorXd step_reference(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& drive, double h,
                               SimConfig::Scheme scheme) {
    const int d = static_cast<int>(a.rows());
    if (scheme == SimConfig::Scheme::rk4) {
        Eigen::VectorXd k1 = a * x + drive;
        Eigen::VectorXd k2 = a * (x + (h / 2.0) * k1) + drive;
        Eigen::VectorXd k3 = a * (x + (h / 2.0) * k2) + drive;
        Eigen::VectorXd k4 = a * (x + h * k3) + drive;
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(d + 1, d + 1);
    aug.topLeftCorner(d, d) = a * h;
    aug.topRightCorner(d, 1) = drive * h;
    Eigen::MatrixXd e = aug.exp();
    return e.topLeftCorner(d, d) * x + e.topRightCorner(d, 1);
}

}  // namespace qcbadc
