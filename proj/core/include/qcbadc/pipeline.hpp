#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qcbadc/analysis.hpp"
#include "qcbadc/control.hpp"
#include "qcbadc/estimator.hpp"
#include "qcbadc/sim.hpp"
#include "qcbadc/system.hpp"

namespace qcbadc {

/// Everything one experiment needs, with the protocol defaults: phi_kappa =
/// pi/3, full-scale tone a quarter band below the notch, Hann 2^14-point PSD.
struct ExperimentConfig {
    DesignSpec design;

    // simulation
    long long train_periods = 1LL << 16;
    long long test_periods = 1LL << 16;
    int substeps = 32;
    double instability_threshold = 10.0;
    SimConfig::Scheme scheme = SimConfig::Scheme::rk4;

    // calibration
    CalibrationConfig calibration;
    bool auto_taps = true;    ///< double the tap count while it buys >= 0.5 dB
    int max_taps = 4096;

    // analysis
    int nfft = 1 << 14;
    Window window = Window::hann;
    int guard_bins = 3;

    // monte carlo
    int mc_trials = 256;
    double mc_half_width = 0.10;
    std::uint64_t master_seed = 1;
    int workers = 0;  ///< 0 = hardware concurrency

    std::string output_dir = "out";

    ExperimentConfig();
};

/// Frequencies resolved from a design: band width omega_b/(2*pi) centered on
/// f_n, test tone a quarter band below center, training tone a quarter band
/// above.
struct BandPlan {
    double bandwidth_hz = 0.0;
    double f_test_hz = 0.0;
    double f_train_hz = 0.0;
};

BandPlan plan_band(const DesignSpec& spec);

/// Wideband training input: an evenly spaced comb of quadrature tones
/// covering the conversion band (components near f_test excluded) with
/// Schroeder phases, scaled so the envelope magnitude peaks at v_fs. A
/// single training tone would pin the estimator response only at its own
/// frequency; the comb constrains it across the whole band.
MultiTone training_comb(const DesignSpec& spec);

/// Same construction over the low-pass band [0, fs/(2*osr)] with the test
/// tone at a quarter band excluded; the in-phase component is the drive.
MultiTone lowpass_training_comb(const DesignSpec& spec);

struct RunResult {
    QuadratureSystem system;
    ControlCoefficients control;
    BandPlan band;
    bool stable = false;
    double max_state_inf_norm = 0.0;
    FirEstimator filter;
    std::vector<std::complex<double>> estimate;
    Spectrum spectrum;
    SnrReport snr;
    std::optional<double> f_hat_n;
};

/// Nominal end-to-end run: design, synthesize, simulate training and test
/// tones, calibrate, reconstruct, analyze.
RunResult run_quadrature(const ExperimentConfig& cfg);

/// Same pipeline on an explicit (possibly perturbed) instance. Band and tone
/// frequencies still come from the nominal design in cfg.
RunResult run_instance(const QuadratureInstance& inst, const ExperimentConfig& cfg);

/// The low-pass building block run. Its band is [0, bandwidth]; the test
/// tone sits at bandwidth/4 and the training tone at 3*bandwidth/4, the same
/// quarter-band offsets from the band center as the quadrature protocol.
struct LowpassRunResult {
    LowpassLeapfrog system;
    bool stable = false;
    double f_test_hz = 0.0;
    FirEstimator filter;
    Spectrum spectrum;
    SnrReport snr;
};

LowpassRunResult run_lowpass(const ExperimentConfig& cfg);

/// Build the nominal instance for a config (design + control synthesis).
QuadratureInstance nominal_instance(const DesignSpec& spec);

}  // namespace qcbadc
