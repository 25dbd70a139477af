#pragma once

#include <cstdint>
#include <functional>

#include "qcbadc/pipeline.hpp"

namespace qcbadc {

struct PerturbationSpec {
    double half_width = 0.10;        ///< relative half-width p; draws in [1-p, 1+p]
    std::uint64_t master_seed = 1;
};

/// Deterministic per-trial seed derived from the master seed (splitmix64).
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

/// Draw an independent uniform factor in [1-p, 1+p] for every structural
/// coefficient occurrence: each alpha/beta entry of A and B, each omega_n
/// coupling entry, and each of the four control gains per stage. The draw
/// order is fixed (alpha entries, beta entries, omega entries, then
/// stage-major control gains), making trials reproducible.
QuadratureInstance perturb(const QuadratureSystem& sys, const ControlCoefficients& ctrl,
                           const PerturbationSpec& spec, int trial);

struct TrialResult {
    int index = 0;
    std::uint64_t seed = 0;
    bool stable = false;
    double snr_db = 0.0;   ///< valid iff stable
    double f_hat_n = 0.0;  ///< Hz; valid iff stable (NaN when no notch found)
};

struct McReport {
    double nominal_snr_db = 0.0;
    double nominal_f_hat_n = 0.0;
    std::vector<TrialResult> trials;  ///< in trial order
    int unstable_count = 0;
    // Ranges over stable trials, relative to nominal.
    double snr_rel_min_db = 0.0;
    double snr_rel_max_db = 0.0;
    double fn_rel_min = 1.0;  ///< f_hat_n / f_n
    double fn_rel_max = 1.0;
};

/// The component-variation experiment: per trial, perturb the nominal
/// instance, re-simulate, recalibrate the estimator on the perturbed
/// instance, and measure SNR and notch frequency. Trials run on
/// cfg.workers threads; per-trial failures are recorded, never fatal.
///
/// `completed` trials (from a checkpoint) are reused instead of re-run;
/// `on_trial` is invoked as each fresh trial finishes (serialized).
McReport run_mc(const ExperimentConfig& cfg,
                const std::vector<TrialResult>& completed = {},
                const std::function<void(const TrialResult&)>& on_trial = nullptr);

}  // namespace qcbadc
