#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "qcbadc/montecarlo.hpp"

using namespace qcbadc;

namespace {

struct NominalParts {
    QuadratureSystem sys;
    ControlCoefficients ctrl;
};

NominalParts nominal_parts(int n, double fn) {
    DesignSpec spec;
    spec.n = n;
    spec.osr = 8.0;
    spec.fn_hz = fn;
    spec.phi_kappa = std::numbers::pi / 3.0;
    const LowpassLeapfrog lp = design_lowpass(spec);
    const double omega_n = 2.0 * std::numbers::pi * fn;
    return {quadrature_transform(lp, omega_n),
            synthesize_control(lp.beta, omega_n, lp.period, spec.phi_kappa, 0.0)};
}

}  // namespace

TEST_CASE("trial seeds are deterministic and distinct") {
    std::set<std::uint64_t> seen;
    for (int t = 0; t < 1000; ++t) {
        const std::uint64_t s = trial_seed(1, t);
        CHECK(s == trial_seed(1, t));
        seen.insert(s);
    }
    CHECK(seen.size() == 1000);
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("zero-width perturbation returns the nominal instance") {
    const NominalParts p = nominal_parts(3, 0.125);
    const QuadratureInstance nominal = make_instance(p.sys, p.ctrl);
    const QuadratureInstance inst = perturb(p.sys, p.ctrl, {0.0, 1}, 5);

    CHECK((inst.a - nominal.a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((inst.b - nominal.b).cwiseAbs().maxCoeff() == 0.0);
    for (int l = 0; l < 3; ++l) {
        CHECK(inst.stages[l].kappa == nominal.stages[l].kappa);
        CHECK(inst.stages[l].kappa_bar == nominal.stages[l].kappa_bar);
        CHECK(inst.stages[l].kappa_tilde == nominal.stages[l].kappa_tilde);
        CHECK(inst.stages[l].kappa_bar_tilde == nominal.stages[l].kappa_bar_tilde);
    }
}

TEST_CASE("perturbation is reproducible and respects the bounds") {
    const NominalParts p = nominal_parts(4, 0.125);
    const QuadratureInstance nominal = make_instance(p.sys, p.ctrl);
    const PerturbationSpec pspec{0.10, 42};

    const QuadratureInstance a = perturb(p.sys, p.ctrl, pspec, 3);
    const QuadratureInstance b = perturb(p.sys, p.ctrl, pspec, 3);
    CHECK((a.a - b.a).cwiseAbs().maxCoeff() == 0.0);

    const QuadratureInstance c = perturb(p.sys, p.ctrl, pspec, 4);
    CHECK((a.a - c.a).cwiseAbs().maxCoeff() > 0.0);

    // Every nonzero structural entry moves by a factor within [0.9, 1.1] and
    // zero entries stay exactly zero.
    int perturbed_entries = 0;
    for (int i = 0; i < a.a.rows(); ++i)
        for (int j = 0; j < a.a.cols(); ++j) {
            if (nominal.a(i, j) == 0.0) {
                CHECK(a.a(i, j) == 0.0);
            } else {
                const double r = a.a(i, j) / nominal.a(i, j);
                CHECK(r >= 0.9);
                CHECK(r <= 1.1);
                if (r != 1.0) ++perturbed_entries;
            }
        }
    CHECK(perturbed_entries > 0);
    for (int l = 0; l < 4; ++l) {
        CHECK(a.stages[l].kappa / nominal.stages[l].kappa >= 0.9);
        CHECK(a.stages[l].kappa / nominal.stages[l].kappa <= 1.1);
        CHECK(a.stages[l].kappa_tilde / nominal.stages[l].kappa_tilde >= 0.9);
        CHECK(a.stages[l].kappa_tilde / nominal.stages[l].kappa_tilde <= 1.1);
    }
}

TEST_CASE("perturb validates the half width") {
    const NominalParts p = nominal_parts(2, 0.125);
    CHECK_THROWS_AS(perturb(p.sys, p.ctrl, {-0.1, 1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(perturb(p.sys, p.ctrl, {1.0, 1}, 0), std::invalid_argument);
}

TEST_CASE("run_mc with zero width reproduces the nominal run exactly") {
    ExperimentConfig cfg;
    cfg.design.n = 2;
    cfg.design.osr = 8.0;
    cfg.design.fn_hz = 0.125;
    cfg.train_periods = 1 << 12;
    cfg.test_periods = (1 << 12) + 128;
    cfg.auto_taps = false;
    cfg.calibration.taps_per_channel = 64;
    cfg.nfft = 1 << 10;
    cfg.mc_trials = 2;
    cfg.mc_half_width = 0.0;
    cfg.workers = 1;

    const McReport report = run_mc(cfg);
    REQUIRE(report.trials.size() == 2);
    CHECK(report.unstable_count == 0);
    for (const TrialResult& t : report.trials) {
        CHECK(t.stable);
        CHECK(t.snr_db == report.nominal_snr_db);  // bit-identical pipeline
    }
    CHECK(report.snr_rel_min_db == 0.0);
    CHECK(report.snr_rel_max_db == 0.0);
}
