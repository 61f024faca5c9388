#include <benchmark/benchmark.h>

#include "valab/dp.hpp"
#include "valab/mdp.hpp"

namespace {

valab::TabularMdp bench_mdp(int states, int actions) {
  valab::Rng rng(7);
  return valab::generate_random_mdp(states, actions, 0.99, 0.5, valab::RewardSpec{}, rng);
}

void BM_BellmanEval(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto mdp = bench_mdp(s, 5);
  const auto pi = valab::PolicyTable::uniform(s, 5);
  valab::QTable q(s, 5);
  for (auto _ : state) {
    q = valab::bellman_eval(q, pi, mdp);
    benchmark::DoNotOptimize(q.matrix().data());
  }
}
BENCHMARK(BM_BellmanEval)->Arg(20)->Arg(100)->Arg(400);

void BM_BellmanControl(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto mdp = bench_mdp(s, 5);
  valab::QTable q(s, 5);
  for (auto _ : state) {
    q = valab::bellman_control(q, mdp);
    benchmark::DoNotOptimize(q.matrix().data());
  }
}
BENCHMARK(BM_BellmanControl)->Arg(20)->Arg(100)->Arg(400);

void BM_SolveQPi(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto mdp = bench_mdp(s, 5);
  const auto pi = valab::PolicyTable::uniform(s, 5);
  for (auto _ : state) benchmark::DoNotOptimize(valab::solve_q_pi(mdp, pi));
}
BENCHMARK(BM_SolveQPi)->Arg(20)->Arg(100);

void BM_VaRecursionStep(benchmark::State& state) {
  const auto mdp = bench_mdp(20, 5);
  const auto mu = valab::PolicyTable::uniform(20, 5);
  valab::VaPair pair{valab::ValueTable(20), valab::AdvTable(20, 5)};
  const auto mode = valab::BackupMode::control();
  for (auto _ : state) {
    pair = valab::va_recursion_step(pair, mdp, mu, mode);
    benchmark::DoNotOptimize(pair.v.vector().data());
  }
}
BENCHMARK(BM_VaRecursionStep);

}  // namespace
