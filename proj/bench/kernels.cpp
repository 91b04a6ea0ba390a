// Serial reference vs OpenMP for each ensemble kernel. Outputs are identical
// by construction; only the wall time differs.
#include "cqed/motion.hpp"
#include "cqed/pumping.hpp"

#include <benchmark/benchmark.h>

using namespace cqed;

namespace {

const LevelScheme &cs() {
  static const LevelScheme s = load_level_scheme(default_atom_data_path());
  return s;
}

TrapContext trap() { return {FortField::from_depth_mk(935.6, 2.3, 25e-6, 43e-6), cs().mass_kg}; }

Execution exec(const benchmark::State &state) {
  return state.range(0) ? Execution::Parallel : Execution::Serial;
}

void BM_ParametricEnsemble(benchmark::State &state) {
  const auto t = trap();
  const double nu = trap_frequencies(t.fort, t.mass_kg).axial_hz;
  HeatingBudget hb;
  hb.intensity_noise = NoiseSpectrum::white_for_time(1.6, nu);
  HeatingEnsembleConfig cfg;
  cfg.trajectories = 32;
  cfg.duration = 2e-3;
  cfg.step.dt = StepControl::max_step(nu);
  cfg.execution = exec(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(heating_ensemble(t, hb, cfg).fitted_rate);
}

void BM_RamanMultilevel(benchmark::State &state) {
  const auto rates = raman_scattering_rates(cs(), 935.6, 1e9);
  MultilevelHeatingConfig cfg;
  cfg.trajectories = 4000;
  cfg.execution = exec(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(raman_heating_multilevel(rates, cfg).rate);
}

void BM_Survival(benchmark::State &state) {
  SurvivalConfig cfg;
  cfg.delays = {0.05, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  cfg.triggers_per_delay = 200;
  cfg.heating.recoil_k_per_s = 11e-6;
  cfg.execution = exec(state);
  const auto t = trap();
  for (auto _ : state)
    benchmark::DoNotOptimize(survival_experiment(t, cfg).fit.tau);
}

void BM_EscapeTimes(benchmark::State &state) {
  HeatingBudget hb;
  hb.background_rate = 1000.0;
  const auto t = trap();
  for (auto _ : state)
    benchmark::DoNotOptimize(escape_times(t, hb, 64, 0.02, 1, exec(state)));
}

} // namespace

BENCHMARK(BM_ParametricEnsemble)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RamanMultilevel)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Survival)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EscapeTimes)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
