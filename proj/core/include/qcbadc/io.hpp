#pragma once

#include <string>
#include <vector>

#include "qcbadc/montecarlo.hpp"
#include "qcbadc/pipeline.hpp"

namespace qcbadc {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Full parametrization of a designed converter, round-trippable through a
/// JSON document (keys: n, osr, fs, fn, beta, alpha, omega_b, omega_n,
/// matrices as nested arrays, plus the control gains).
struct DesignDocument {
    DesignSpec spec;
    LowpassLeapfrog lowpass;
    QuadratureSystem system;
    ControlCoefficients control;
    double f_test_hz = 0.0;
    double f_train_hz = 0.0;
};

DesignDocument make_design_document(const DesignSpec& spec);
std::string design_document_to_json(const DesignDocument& doc);
DesignDocument design_document_from_json(const std::string& text);
void save_design_document(const DesignDocument& doc, const std::string& path);
DesignDocument load_design_document(const std::string& path);

/// Experiment config file: JSON, unknown keys rejected. Frequencies are in
/// units of fs unless the key carries an _hz suffix; tau_dc is in units of
/// the control period unless given as tau_dc_s.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

// Control traces: packed bit container (header with channels, length,
// period; channel-major, one bit per decision, +1 -> 1) and a debug CSV.
void save_trace_bits(const ControlTrace& trace, const std::string& path);
ControlTrace load_trace_bits(const std::string& path);
void save_trace_csv(const ControlTrace& trace, const std::string& path);

// Filter banks: binary container (header with outputs, channels, taps,
// delay; little-endian doubles) and an inspection CSV.
void save_filter(const FirEstimator& fir, const std::string& path);
FirEstimator load_filter(const std::string& path);
void save_filter_csv(const FirEstimator& fir, const std::string& path);

/// Two-column CSV (fT, dB) of the positive-or-full frequency span.
void save_spectrum_csv(const Spectrum& spec, const std::string& path,
                       bool positive_half_only = false);

void save_snr_report_json(const SnrReport& report, const std::string& path);

// Monte-Carlo outputs: one row per trial, checkpoint append/load, and
// fixed-edge histograms of relative SNR and relative notch frequency.
void save_mc_trials_csv(const std::vector<TrialResult>& trials, const std::string& path);
void append_trial_checkpoint(const TrialResult& trial, const std::string& path);
std::vector<TrialResult> load_trial_checkpoint(const std::string& path);
void save_mc_histograms(const McReport& report, double f_n_hz,
                        const std::string& snr_path, const std::string& fn_path);

/// Machine-readable reproduction record: config snapshot, master seed,
/// toolkit version.
void save_provenance(const ExperimentConfig& cfg, const std::string& path);

}  // namespace qcbadc
