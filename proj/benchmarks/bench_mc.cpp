#include <benchmark/benchmark.h>

#include <cmath>

#include "weakeq/habit.hpp"
#include "weakeq/mc.hpp"

namespace {

const weakeq::EquilibriumBundle& bundle() {
  static const auto b = weakeq::make_habit_bundle(
      weakeq::solve_habit_equilibrium({}, {}, weakeq::HabitSpec::linear(0.15)));
  return b;
}

weakeq::McConfig config(std::size_t paths, bool bridge) {
  weakeq::McConfig cfg;
  cfg.paths = paths;
  cfg.bridge_correction = bridge;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

// Constant control: exact log-normal blocks.
static void BM_StoppedPayoffConstant(benchmark::State& state) {
  const auto& b = bundle();
  const auto cfg = config(static_cast<std::size_t>(state.range(0)), state.range(1) != 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(weakeq::simulate_stopped_payoff(
        1.0, 1.0, b.control_hat, {0.0, b.boundary}, b.payoff, b.market, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StoppedPayoffConstant)
    ->Args({2000, 0})
    ->Args({2000, 1})
    ->Unit(benchmark::kMillisecond);

// State-dependent control: per-step Euler in log space.
static void BM_StoppedPayoffFeedback(benchmark::State& state) {
  const auto& b = bundle();
  auto cfg = config(static_cast<std::size_t>(state.range(0)), false);
  cfg.t_max = 8.0;
  const double theta = b.control_hat(1.0);
  const auto control =
      weakeq::Control::feedback([theta](double x) { return theta * (1.0 + 0.1 * std::sin(x)); });
  for (auto _ : state)
    benchmark::DoNotOptimize(weakeq::simulate_stopped_payoff(
        1.0, 1.0, control, {0.0, b.boundary}, b.payoff, b.market, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StoppedPayoffFeedback)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_ControlProbe(benchmark::State& state) {
  const auto& b = bundle();
  const auto cfg = config(static_cast<std::size_t>(state.range(0)), true);
  const double u = 2.0 * b.control_hat(1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        weakeq::control_perturbation_probe(1.0, b, u, weakeq::default_eps_list(), cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ControlProbe)->Arg(20000)->Unit(benchmark::kMillisecond);
