#include <benchmark/benchmark.h>

#include "valab/learners.hpp"
#include "valab/mdp.hpp"
#include "valab/sampler.hpp"

namespace {

struct Data {
  valab::TabularMdp mdp;
  std::vector<valab::Trajectory> trajectories;
  valab::PolicyTable mu_hat;
};

const Data& data() {
  static const Data d = [] {
    valab::Rng rng(11);
    auto mdp = valab::generate_random_mdp(20, 5, 0.99, 0.5, valab::RewardSpec{}, rng);
    const auto mu = valab::PolicyTable::uniform(20, 5);
    auto trajectories = valab::collect_trajectories(mdp, mu, 20, 200, 0, rng);
    valab::BehaviorEstimate estimate(20, 5);
    for (const auto& t : trajectories) estimate.observe(t.transitions);
    return Data{std::move(mdp), std::move(trajectories), estimate.estimated_policy()};
  }();
  return d;
}

std::vector<valab::Segment> segments() { return valab::make_segments(data().trajectories, 1); }

void BM_GradStepQ(benchmark::State& state) {
  const auto batch = segments();
  valab::LearnSpec spec;
  auto learner = valab::QLearnerState::zeros(20, 5);
  for (auto _ : state) valab::grad_step_qlearning(learner, batch, spec);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_GradStepQ);

void BM_GradStepVa(benchmark::State& state) {
  const auto batch = segments();
  valab::LearnSpec spec;
  auto learner = valab::VaLearnerState::zeros(20, 5);
  for (auto _ : state) valab::grad_step_va(learner, batch, data().mu_hat, spec);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_GradStepVa);

void BM_GradStepBehaviorDueling(benchmark::State& state) {
  const auto batch = segments();
  valab::LearnSpec spec;
  auto learner = valab::DuelingLearnerState::zeros(data().mu_hat);
  for (auto _ : state) valab::grad_step_qlearning(learner, batch, spec);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_GradStepBehaviorDueling);

void BM_SynchronousSaStep(benchmark::State& state) {
  valab::Rng rng(3);
  const auto mdp = valab::generate_random_mdp(5, 3, 0.9, 0.5, valab::RewardSpec{}, rng);
  const auto mu = valab::PolicyTable::uniform(5, 3);
  valab::LearnSpec spec;
  spec.gamma = 0.9;
  spec.update_style = valab::UpdateStyle::synchronous_sa;
  spec.schedule = valab::LrSchedule::robbins_monro(1.0, 10.0, 0.7);
  auto learner = valab::VaLearnerState::zeros(5, 3);
  for (auto _ : state) valab::synchronous_sa_step(learner, mdp, mu, spec, rng);
}
BENCHMARK(BM_SynchronousSaStep);

}  // namespace
