#include <benchmark/benchmark.h>

#include "weakeq/ambiguity.hpp"
#include "weakeq/habit.hpp"
#include "weakeq/verifier.hpp"

namespace {

weakeq::HabitEquilibrium reference(double slope) {
  return weakeq::solve_habit_equilibrium({}, {}, weakeq::HabitSpec::linear(slope));
}

}  // namespace

static void BM_SolveThreshold(benchmark::State& state) {
  const auto habit = weakeq::HabitSpec::linear(0.15);
  const double alpha = reference(0.15).alpha;
  for (auto _ : state) benchmark::DoNotOptimize(weakeq::solve_threshold(alpha, {}, habit));
}
BENCHMARK(BM_SolveThreshold);

static void BM_ValueDominance(benchmark::State& state) {
  const auto eq = reference(0.15);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        weakeq::check_value_dominance(eq, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_ValueDominance)->Arg(400)->Arg(4000);

static void BM_VerifySystem(benchmark::State& state) {
  const auto problem = weakeq::make_habit_problem(reference(0.15));
  weakeq::VerifierOptions opts;
  opts.grid_c = opts.grid_d = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(weakeq::verify_system(problem, opts));
}
BENCHMARK(BM_VerifySystem)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_ExclusionCheck(benchmark::State& state) {
  const auto belief = weakeq::Belief::quasi_exponential(0.5, 0.05, 0.15);
  for (auto _ : state) benchmark::DoNotOptimize(weakeq::exclusion_check(1.0, belief, {}, 400));
}
BENCHMARK(BM_ExclusionCheck);
