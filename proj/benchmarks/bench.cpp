#include <benchmark/benchmark.h>

#include <complex>
#include <numbers>
#include <random>

#include "qcbadc/analysis.hpp"
#include "qcbadc/estimator.hpp"
#include "qcbadc/pipeline.hpp"
#include "qcbadc/sim.hpp"

namespace {

qcbadc::DesignSpec protocol_spec(int n, double osr) {
    qcbadc::DesignSpec spec;
    spec.n = n;
    spec.osr = osr;
    spec.fn_hz = 0.125;
    spec.phi_kappa = std::numbers::pi / 3.0;
    return spec;
}

void bm_synthesize_control(benchmark::State& state) {
    const double beta = 0.5, period = 1.0, omega_n = 2.0 * std::numbers::pi * 0.125;
    for (auto _ : state) {
        auto c = qcbadc::synthesize_control(beta, omega_n, period,
                                            std::numbers::pi / 3.0, 0.0);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(bm_synthesize_control);

void bm_simulate(benchmark::State& state) {
    const auto spec = protocol_spec(static_cast<int>(state.range(0)), 8.0);
    const auto inst = qcbadc::nominal_instance(spec);
    const qcbadc::BandPlan band = qcbadc::plan_band(spec);
    qcbadc::InputSignal tone{1.0, band.f_test_hz, 0.0};
    qcbadc::SimConfig cfg;
    cfg.num_periods = 1024;
    cfg.scheme = state.range(1) ? qcbadc::SimConfig::Scheme::exact
                                : qcbadc::SimConfig::Scheme::rk4;
    for (auto _ : state) {
        auto out = qcbadc::simulate(inst, tone, cfg);
        benchmark::DoNotOptimize(out.trace.decisions.data());
    }
    state.SetItemsProcessed(state.iterations() * cfg.num_periods);
}
BENCHMARK(bm_simulate)->Args({3, 0})->Args({6, 0})->Args({6, 1})->Args({8, 0});

void bm_psd(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    std::vector<std::complex<double>> x(1 << 16);
    for (auto& v : x) v = {gauss(rng), gauss(rng)};
    for (auto _ : state) {
        auto spec = qcbadc::psd(x, 1 << 14, qcbadc::Window::hann, 1.0);
        benchmark::DoNotOptimize(spec.psd.data());
    }
}
BENCHMARK(bm_psd);

void bm_calibrate(benchmark::State& state) {
    const auto spec = protocol_spec(3, 8.0);
    const auto inst = qcbadc::nominal_instance(spec);
    const qcbadc::BandPlan band = qcbadc::plan_band(spec);
    qcbadc::InputSignal tone{1.0, band.f_train_hz, 0.0};
    qcbadc::SimConfig sim_cfg;
    sim_cfg.num_periods = 1 << 14;
    auto out = qcbadc::simulate(inst, tone, sim_cfg);
    std::vector<std::vector<double>> refs(2);
    for (auto& r : refs) r.resize(out.trace.length);
    for (long long k = 0; k < out.trace.length; ++k) {
        refs[0][k] = tone.in_phase(k * inst.period);
        refs[1][k] = tone.quadrature(k * inst.period);
    }
    qcbadc::CalibrationConfig cal;
    cal.taps_per_channel = 256;
    for (auto _ : state) {
        auto fir = qcbadc::calibrate(out.trace, refs, cal);
        benchmark::DoNotOptimize(fir.taps.data());
    }
}
BENCHMARK(bm_calibrate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
