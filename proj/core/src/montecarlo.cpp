#include "qcbadc/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace qcbadc {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
    return splitmix64(master_seed + splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

QuadratureInstance perturb(const QuadratureSystem& sys, const ControlCoefficients& ctrl,
                           const PerturbationSpec& spec, int trial) {
    if (spec.half_width < 0.0 || spec.half_width >= 1.0)
        throw std::invalid_argument("perturb: half_width must lie in [0, 1)");

    QuadratureInstance inst = make_instance(sys, ctrl);
    std::mt19937_64 rng(trial_seed(spec.master_seed, trial));
    std::uniform_real_distribution<double> factor(1.0 - spec.half_width,
                                                  1.0 + spec.half_width);
    const int n = sys.n;

    // alpha entries: superdiagonals of both diagonal blocks
    for (int i = 0; i + 1 < n; ++i) inst.a(i, i + 1) *= factor(rng);
    for (int i = 0; i + 1 < n; ++i) inst.a(n + i, n + i + 1) *= factor(rng);
    // beta entries: subdiagonals of both blocks, then the input gains
    for (int i = 0; i + 1 < n; ++i) inst.a(i + 1, i) *= factor(rng);
    for (int i = 0; i + 1 < n; ++i) inst.a(n + i + 1, n + i) *= factor(rng);
    inst.b(0, 0) *= factor(rng);
    inst.b(n, 1) *= factor(rng);
    // omega_n entries: the two coupling diagonals
    for (int i = 0; i < n; ++i) inst.a(i, n + i) *= factor(rng);
    for (int i = 0; i < n; ++i) inst.a(n + i, i) *= factor(rng);
    // per-stage control gains
    for (int l = 0; l < n; ++l) {
        inst.stages[l].kappa *= factor(rng);
        inst.stages[l].kappa_bar *= factor(rng);
        inst.stages[l].kappa_tilde *= factor(rng);
        inst.stages[l].kappa_bar_tilde *= factor(rng);
    }
    return inst;
}

McReport run_mc(const ExperimentConfig& cfg,
                const std::vector<TrialResult>& completed,
                const std::function<void(const TrialResult&)>& on_trial) {
    cfg.design.validate();

    // Component mismatch breaks the I/Q symmetry the complex-paired
    // calibration relies on (a perturbed instance has image leakage only a
    // full 2N-channel tap bank can cancel), so the whole batch — including
    // the nominal baseline, for a fair SNR reference — uses unpaired taps.
    ExperimentConfig mc_cfg = cfg;
    mc_cfg.calibration.pair_channels = false;

    RunResult nominal = run_quadrature(mc_cfg);
    if (!nominal.stable)
        throw std::runtime_error("run_mc: nominal design is unstable");

    McReport report;
    report.nominal_snr_db = nominal.snr.snr_db;
    report.nominal_f_hat_n =
        nominal.f_hat_n.value_or(std::numeric_limits<double>::quiet_NaN());

    // Trials reuse the tap count the nominal run settled on.
    ExperimentConfig trial_cfg = mc_cfg;
    trial_cfg.auto_taps = false;
    trial_cfg.calibration.taps_per_channel = nominal.filter.taps_per_channel;

    const LowpassLeapfrog lp = design_lowpass(cfg.design);
    const double omega_n = 2.0 * std::numbers::pi * cfg.design.fn_hz;
    const QuadratureSystem sys = quadrature_transform(lp, omega_n);
    const ControlCoefficients ctrl = synthesize_control(
        lp.beta, omega_n, lp.period, cfg.design.phi_kappa, cfg.design.tau_dc);
    const PerturbationSpec pspec{cfg.mc_half_width, cfg.master_seed};

    report.trials.resize(cfg.mc_trials);
    std::vector<char> done(cfg.mc_trials, 0);
    for (const TrialResult& t : completed) {
        if (t.index >= 0 && t.index < cfg.mc_trials) {
            report.trials[t.index] = t;
            done[t.index] = 1;
        }
    }

    std::atomic<int> next{0};
    std::mutex cb_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.mc_trials) return;
            if (done[i]) continue;
            TrialResult tr;
            tr.index = i;
            tr.seed = trial_seed(cfg.master_seed, i);
            try {
                const QuadratureInstance inst = perturb(sys, ctrl, pspec, i);
                const RunResult r = run_instance(inst, trial_cfg);
                tr.stable = r.stable;
                if (r.stable) {
                    tr.snr_db = r.snr.snr_db;
                    tr.f_hat_n =
                        r.f_hat_n.value_or(std::numeric_limits<double>::quiet_NaN());
                }
            } catch (const std::exception&) {
                tr.stable = false;  // diverged or failed to calibrate
            }
            report.trials[i] = tr;
            if (on_trial) {
                std::lock_guard<std::mutex> lock(cb_mutex);
                on_trial(tr);
            }
        }
    };

    int workers = cfg.workers > 0
                      ? cfg.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, cfg.mc_trials));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Aggregate in trial order over stable trials only.
    bool first_snr = true, first_fn = true;
    for (const TrialResult& t : report.trials) {
        if (!t.stable) {
            ++report.unstable_count;
            continue;
        }
        const double rel = t.snr_db - report.nominal_snr_db;
        if (first_snr || rel < report.snr_rel_min_db) report.snr_rel_min_db = rel;
        if (first_snr || rel > report.snr_rel_max_db) report.snr_rel_max_db = rel;
        first_snr = false;
        if (std::isfinite(t.f_hat_n) && cfg.design.fn_hz > 0.0) {
            const double ratio = t.f_hat_n / cfg.design.fn_hz;
            if (first_fn || ratio < report.fn_rel_min) report.fn_rel_min = ratio;
            if (first_fn || ratio > report.fn_rel_max) report.fn_rel_max = ratio;
            first_fn = false;
        }
    }
    return report;
}

}  // namespace qcbadc
