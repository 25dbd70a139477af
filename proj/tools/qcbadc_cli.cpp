// Command-line front end: design synthesis, end-to-end runs, notch sweeps,
// coefficient sweeps, Monte-Carlo robustness experiments, and a quick
// self-test.
//
// Exit codes: 0 success, 2 bad arguments or config, 3 unstable/diverged
// simulation, 4 calibration failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qcbadc/io.hpp"
#include "qcbadc/montecarlo.hpp"
#include "qcbadc/pipeline.hpp"

namespace {

constexpr int kExitBadConfig = 2;
constexpr int kExitUnstable = 3;
constexpr int kExitCalibration = 4;

struct CommonOptions {
    std::string config_path;
    std::optional<int> n;
    std::optional<double> osr;
    std::optional<double> fn;  // units of fs
    std::optional<long long> train_periods;
    std::optional<long long> test_periods;
    std::optional<int> taps;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> workers;
    std::string out_dir;
};

void add_common(CLI::App* app, CommonOptions& opt) {
    app->add_option("--config", opt.config_path, "experiment config JSON file");
    app->add_option("--n", opt.n, "loop order per branch");
    app->add_option("--osr", opt.osr, "oversampling ratio");
    app->add_option("--fn", opt.fn, "notch frequency in units of fs");
    app->add_option("--train-periods", opt.train_periods, "training trace length");
    app->add_option("--test-periods", opt.test_periods, "test trace length");
    app->add_option("--taps", opt.taps, "FIR taps per channel");
    app->add_option("--seed", opt.seed, "Monte-Carlo master seed");
    app->add_option("--trials", opt.trials, "Monte-Carlo trial count");
    app->add_option("--workers", opt.workers, "worker threads (0 = all cores)");
    app->add_option("--out-dir", opt.out_dir, "output directory");
}

qcbadc::ExperimentConfig resolve_config(const CommonOptions& opt) {
    qcbadc::ExperimentConfig cfg;
    if (!opt.config_path.empty()) cfg = qcbadc::load_experiment_config(opt.config_path);
    if (opt.n) cfg.design.n = *opt.n;
    if (opt.osr) cfg.design.osr = *opt.osr;
    if (opt.fn) cfg.design.fn_hz = *opt.fn * cfg.design.fs_hz;
    if (opt.train_periods) cfg.train_periods = *opt.train_periods;
    if (opt.test_periods) cfg.test_periods = *opt.test_periods;
    if (opt.taps) {
        cfg.calibration.taps_per_channel = *opt.taps;
        cfg.auto_taps = false;
    }
    if (opt.seed) cfg.master_seed = *opt.seed;
    if (opt.trials) cfg.mc_trials = *opt.trials;
    if (opt.workers) cfg.workers = *opt.workers;
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    cfg.design.validate();
    return cfg;
}

std::filesystem::path ensure_out_dir(const qcbadc::ExperimentConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void print_band(const qcbadc::ExperimentConfig& cfg) {
    const qcbadc::BandPlan band = qcbadc::plan_band(cfg.design);
    std::printf("f_n      = %.9g fs\n", cfg.design.fn_hz / cfg.design.fs_hz);
    std::printf("bandwidth = %.9g fs\n", band.bandwidth_hz / cfg.design.fs_hz);
    std::printf("f_test   = %.9g fs\n", band.f_test_hz / cfg.design.fs_hz);
    std::printf("f_train  = %.9g fs\n", band.f_train_hz / cfg.design.fs_hz);
}

int cmd_design(const CommonOptions& opt) {
    const qcbadc::ExperimentConfig cfg = resolve_config(opt);
    const qcbadc::DesignDocument doc = qcbadc::make_design_document(cfg.design);
    const auto dir = ensure_out_dir(cfg);
    qcbadc::save_design_document(doc, (dir / "design.json").string());
    print_band(cfg);
    std::printf("beta   = %.9g\nalpha  = %.9g\nomega_n = %.9g\n", doc.lowpass.beta,
                doc.lowpass.alpha, doc.system.omega_n);
    std::printf("kappa_phi = %.9g  kbar_phi = %.9g\n", doc.control.kappa,
                doc.control.kappa_bar);
    std::printf("ktilde_phi = %.9g  kbar_tilde_phi = %.9g\n", doc.control.kappa_tilde,
                doc.control.kappa_bar_tilde);
    std::printf("wrote %s\n", (dir / "design.json").string().c_str());
    return 0;
}

int cmd_run(const CommonOptions& opt) {
    const qcbadc::ExperimentConfig cfg = resolve_config(opt);
    const auto dir = ensure_out_dir(cfg);
    print_band(cfg);

    const qcbadc::RunResult result = qcbadc::run_quadrature(cfg);
    if (!result.stable) {
        std::fprintf(stderr, "simulation unstable (max |x|_inf = %.3g)\n",
                     result.max_state_inf_norm);
        return kExitUnstable;
    }
    qcbadc::save_design_document(qcbadc::make_design_document(cfg.design),
                                 (dir / "design.json").string());
    qcbadc::save_spectrum_csv(result.spectrum, (dir / "spectrum.csv").string());
    qcbadc::save_filter(result.filter, (dir / "filter.bin").string());
    qcbadc::save_filter_csv(result.filter, (dir / "filter.csv").string());
    qcbadc::save_snr_report_json(result.snr, (dir / "snr.json").string());
    qcbadc::save_provenance(cfg, (dir / "provenance.json").string());

    std::printf("taps/channel = %d\n", result.filter.taps_per_channel);
    std::printf("SNR = %.2f dB over band [%.9g, %.9g] fs\n", result.snr.snr_db,
                result.snr.f_lo / cfg.design.fs_hz, result.snr.f_hi / cfg.design.fs_hz);
    if (result.f_hat_n)
        std::printf("f_hat_n = %.9g fs (%.3f%% of f_n)\n",
                    *result.f_hat_n / cfg.design.fs_hz,
                    100.0 * *result.f_hat_n / cfg.design.fn_hz);
    else
        std::printf("f_hat_n = (no notch found)\n");
    std::printf("outputs in %s\n", dir.string().c_str());
    return 0;
}

int cmd_sweep_notch(const CommonOptions& opt, const std::vector<double>& fn_list) {
    qcbadc::ExperimentConfig cfg = resolve_config(opt);
    const auto dir = ensure_out_dir(cfg);
    std::ostringstream csv;
    csv << "fnT,snr_db,f_hat_nT\n";
    for (double fn : fn_list) {
        cfg.design.fn_hz = fn * cfg.design.fs_hz;
        cfg.design.validate();
        const qcbadc::RunResult r = qcbadc::run_quadrature(cfg);
        if (!r.stable) {
            std::fprintf(stderr, "fn = %.9g fs: unstable\n", fn);
            return kExitUnstable;
        }
        const double fhat = r.f_hat_n.value_or(std::nan("")) / cfg.design.fs_hz;
        std::printf("fn = %.9g fs: SNR = %.2f dB, f_hat_n = %.9g fs\n", fn,
                    r.snr.snr_db, fhat);
        csv << fn << ',' << r.snr.snr_db << ',' << fhat << "\n";
    }
    std::ofstream out(dir / "notch_sweep.csv");
    out << csv.str();
    std::printf("wrote %s\n", (dir / "notch_sweep.csv").string().c_str());
    return 0;
}

int cmd_coeff_sweep(const CommonOptions& opt, int points, double beta_t, double phi,
                    double tau) {
    const qcbadc::ExperimentConfig cfg = resolve_config(opt);
    const auto dir = ensure_out_dir(cfg);
    const double period = 1.0 / cfg.design.fs_hz;
    const double beta = beta_t / period;
    std::ostringstream csv;
    csv << "fpT,kappa,bar_kappa,tilde_kappa,bar_tilde_kappa\n";
    for (int i = 0; i < points; ++i) {
        const double fp_t = i / static_cast<double>(points);  // f_n * T in [0, 1)
        const double omega_n = 2.0 * std::numbers::pi * fp_t / period;
        const qcbadc::ControlCoefficients c =
            qcbadc::synthesize_control(beta, omega_n, period, phi, tau * period);
        char row[256];
        std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g,%.17g\n", fp_t,
                      c.kappa, c.kappa_bar, c.kappa_tilde, c.kappa_bar_tilde);
        csv << row;
    }
    std::ofstream out(dir / "coeff_sweep.csv");
    out << csv.str();
    std::printf("wrote %s (%d points, beta*T = %.9g, phi = %.9g, tau = %.9g T)\n",
                (dir / "coeff_sweep.csv").string().c_str(), points, beta_t, phi, tau);
    return 0;
}

int cmd_montecarlo(const CommonOptions& opt, bool resume) {
    const qcbadc::ExperimentConfig cfg = resolve_config(opt);
    const auto dir = ensure_out_dir(cfg);
    const std::string checkpoint = (dir / "mc_trials.csv").string();
    print_band(cfg);

    std::vector<qcbadc::TrialResult> completed;
    if (resume) {
        completed = qcbadc::load_trial_checkpoint(checkpoint);
        std::printf("resuming: %zu trials already done\n", completed.size());
    } else {
        std::error_code ec;
        std::filesystem::remove(checkpoint, ec);
    }

    const qcbadc::McReport report = qcbadc::run_mc(
        cfg, completed, [&](const qcbadc::TrialResult& t) {
            qcbadc::append_trial_checkpoint(t, checkpoint);
            std::printf("trial %3d: %s  snr = %7.2f dB\n", t.index,
                        t.stable ? "stable  " : "UNSTABLE", t.snr_db);
            std::fflush(stdout);
        });

    qcbadc::save_mc_trials_csv(report.trials, checkpoint);
    qcbadc::save_mc_histograms(report, cfg.design.fn_hz,
                               (dir / "mc_hist_snr.csv").string(),
                               (dir / "mc_hist_fn.csv").string());
    qcbadc::save_provenance(cfg, (dir / "provenance.json").string());

    std::printf("nominal SNR = %.2f dB, nominal f_hat_n = %.9g fs\n",
                report.nominal_snr_db, report.nominal_f_hat_n / cfg.design.fs_hz);
    std::printf("unstable trials: %d / %zu\n", report.unstable_count,
                report.trials.size());
    std::printf("SNR spread rel. nominal: [%.2f, %.2f] dB\n", report.snr_rel_min_db,
                report.snr_rel_max_db);
    std::printf("f_hat_n / f_n: [%.5f, %.5f]\n", report.fn_rel_min, report.fn_rel_max);
    return 0;
}

int cmd_selftest() {
    using namespace qcbadc;
    int failures = 0;
    auto check = [&](bool ok, const char* what) {
        std::printf("%s %s\n", ok ? "PASS" : "FAIL", what);
        if (!ok) ++failures;
    };

    DesignSpec spec;
    spec.n = 3;
    spec.osr = 8.0;
    spec.fn_hz = 0.125;
    const LowpassLeapfrog lp = design_lowpass(spec);
    check(std::abs(2.0 * lp.beta * lp.period - 1.0) < 1e-15, "2*beta*T == 1");
    check(check_superposition(lp.beta, lp.period), "superposition bound");

    const double omega_n = 2.0 * std::numbers::pi * spec.fn_hz;
    const ControlCoefficients c =
        synthesize_control(lp.beta, omega_n, lp.period, std::numbers::pi / 3.0, 0.0);
    const double mag = std::hypot(c.kappa_tilde, c.kappa_bar_tilde);
    check(std::abs(mag - 1.0 / (lp.beta * lp.period)) < 1e-12,
          "observation magnitude 1/(beta*T)");

    ExperimentConfig cfg;
    cfg.design = spec;
    cfg.train_periods = 1 << 14;
    cfg.test_periods = (1 << 14) + 512;
    cfg.auto_taps = false;
    cfg.calibration.taps_per_channel = 256;
    const RunResult r = run_quadrature(cfg);
    check(r.stable, "short nominal run stable");
    check(r.stable && r.snr.snr_db > 40.0, "short nominal run SNR > 40 dB");

    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadrature control-bounded ADC design and simulation toolkit"};
    app.require_subcommand(1);

    CommonOptions opt;

    CLI::App* design = app.add_subcommand("design", "synthesize a converter design");
    add_common(design, opt);

    CLI::App* run = app.add_subcommand("run", "nominal end-to-end run");
    add_common(run, opt);

    CLI::App* sweep = app.add_subcommand("sweep-notch", "SNR across notch placements");
    add_common(sweep, opt);
    std::vector<double> fn_list{0.125, 0.25, 0.375};
    sweep->add_option("--fn-list", fn_list, "notch frequencies, units of fs");

    CLI::App* coeff = app.add_subcommand("coeff-sweep",
                                         "control gains vs. notch frequency");
    add_common(coeff, opt);
    int points = 256;
    double beta_t = 0.5, phi = std::numbers::pi / 3.0, tau = 0.0;
    coeff->add_option("--points", points, "sample count over fpT in [0, 1)");
    coeff->add_option("--beta-t", beta_t, "beta * T");
    coeff->add_option("--phi", phi, "phi_kappa in radians");
    coeff->add_option("--tau", tau, "tau_dc in units of T");

    CLI::App* mc = app.add_subcommand("montecarlo", "component-variation experiment");
    add_common(mc, opt);
    bool resume = false;
    mc->add_flag("--resume", resume, "reuse trials from an existing checkpoint");

    CLI::App* selftest = app.add_subcommand("selftest", "quick structural checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadConfig;
    }

    try {
        if (design->parsed()) return cmd_design(opt);
        if (run->parsed()) return cmd_run(opt);
        if (sweep->parsed()) return cmd_sweep_notch(opt, fn_list);
        if (coeff->parsed()) return cmd_coeff_sweep(opt, points, beta_t, phi, tau);
        if (mc->parsed()) return cmd_montecarlo(opt, resume);
        if (selftest->parsed()) return cmd_selftest();
    } catch (const qcbadc::SimDivergedError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUnstable;
    } catch (const qcbadc::CalibrationError& e) {
        std::fprintf(stderr, "error: %s (residual %.3g)\n", e.what(),
                     e.achieved_residual);
        return kExitCalibration;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadConfig;
    }
    return kExitBadConfig;
}
