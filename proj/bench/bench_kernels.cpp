#include <benchmark/benchmark.h>

#include "snmpc/config.hpp"
#include "snmpc/cstr_density.hpp"
#include "snmpc/mpc.hpp"
#include "snmpc/sde.hpp"

using namespace snmpc;

namespace {

const model::CstrParameters kParams{};

sde::InitialSampler beta_start() {
  const model::Beta4Distribution dist(0.0, 2.0, 320.0, 320.0);
  return [dist](sde::WienerStream& s) {
    model::Vector x(2);
    x << dist.sample(s.engine()), 315.0;
    return x;
  };
}

template <bool Parallel>
void BM_Ensemble(benchmark::State& state) {
  const auto sys = model::build_cstr(kParams);
  const auto policy = ControlPolicy::constant(10.0, 1, Eigen::Vector2d(0.5708, 8.6714));
  sde::EnsembleOptions opt;
  opt.t_end = 10.0;
  opt.record_every = 100;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto paths = Parallel ? sde::simulate_ensemble(sys, beta_start(), policy, n, opt)
                          : sde::simulate_ensemble_serial(sys, beta_start(), policy, n, opt);
    benchmark::DoNotOptimize(paths);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

mpc::ClosedLoopConfig small_loop() {
  config::ExperimentConfig cfg = config::parse_config(nlohmann::json::object());
  cfg.closed_loop.run_time = 4.0;
  cfg.ocp.budget.max_evaluations = 20;
  return config::build_closed_loop(cfg);
}

template <bool Parallel>
void BM_MonteCarlo(benchmark::State& state) {
  const auto sys = model::build_cstr(kParams);
  const auto loop = small_loop();
  mpc::MonteCarloOptions opt;
  opt.n_realizations = static_cast<int>(state.range(0));
  opt.snapshot_times = {0.0, 4.0};
  for (auto _ : state) {
    auto rec = Parallel ? mpc::run_monte_carlo(sys, loop, opt) : mpc::run_monte_carlo_serial(sys, loop, opt);
    benchmark::DoNotOptimize(rec);
  }
  state.SetItemsProcessed(state.iterations() * opt.n_realizations);
}

void BM_FpPropagate(benchmark::State& state) {
  const fp::Grid1D grid(0.0, 2.0, static_cast<int>(state.range(0)));
  const auto initial = fp::density_from_beta(model::Beta4Distribution(0.0, 2.0, 320.0, 320.0), grid);
  const auto policy = ControlPolicy::constant(30.0, 1, Eigen::Vector2d(0.5708, 8.6714));
  const std::vector<double> at{30.0};
  for (auto _ : state) {
    fp::CstrMeanFieldAdvection adv(kParams, policy, 315.0);
    auto traj = fp::fp_propagate(initial, adv, 0.001, 0.0, 30.0, 0.05, at);
    benchmark::DoNotOptimize(traj);
  }
}

}  // namespace

BENCHMARK(BM_Ensemble<false>)->Name("ensemble/serial")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble<true>)->Name("ensemble/openmp")->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonteCarlo<false>)->Name("montecarlo/serial")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo<true>)->Name("montecarlo/openmp")->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FpPropagate)->Name("fp/propagate_30min")->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
