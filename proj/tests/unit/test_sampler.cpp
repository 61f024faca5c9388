#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "valab/errors.hpp"
#include "valab/mdp.hpp"
#include "valab/sampler.hpp"

using namespace valab;

namespace {

TabularMdp small_mdp(std::uint64_t seed) {
  Rng rng(seed);
  return generate_random_mdp(5, 3, 0.9, 0.5, RewardSpec{}, rng);
}

}  // namespace

TEST(DefaultHorizon, ClosestInteger) {
  EXPECT_EQ(default_horizon(0.99), 200);
  EXPECT_EQ(default_horizon(0.9), 20);
  EXPECT_EQ(default_horizon(0.0), 2);
}

TEST(CollectTrajectories, ShapeAndChaining) {
  Rng mrng(1);
  const auto mdp = generate_random_mdp(20, 5, 0.99, 0.5, RewardSpec{}, mrng);
  Rng rng(2);
  const auto trajs = collect_trajectories(mdp, PolicyTable::uniform(20, 5), 20, default_horizon(0.99), 0, rng);
  ASSERT_EQ(trajs.size(), 20u);
  for (const auto& t : trajs) {
    ASSERT_EQ(t.transitions.size(), 200u);
    EXPECT_EQ(t.start_state, 0);
    EXPECT_EQ(t.truncation_length, 200);
    EXPECT_EQ(t.transitions.front().x, 0);
    for (std::size_t i = 0; i + 1 < t.transitions.size(); ++i)
      ASSERT_EQ(t.transitions[i].x_next, t.transitions[i + 1].x);
    for (const auto& step : t.transitions) ASSERT_EQ(step.r, mdp.reward(step.x, step.a));
  }
}

TEST(CollectTrajectories, DeterministicModelGivesUniqueRollout) {
  // x -> x + 1 mod 3 under action 1, mu always picks action 1.
  Matrix p = Matrix::Zero(6, 3);
  for (int x = 0; x < 3; ++x) {
    p(x * 2 + 0, x) = 1.0;
    p(x * 2 + 1, (x + 1) % 3) = 1.0;
  }
  Matrix r(3, 2);
  r << 0, 1, 0, 2, 0, 3;
  const TabularMdp mdp(3, 2, p, r, 0.9);
  const std::vector<int> actions{1, 1, 1};
  Rng rng(0);
  const auto trajs = collect_trajectories(mdp, PolicyTable::deterministic(actions, 2), 1, 5, 1, rng);
  const std::vector<Transition> expected{{1, 1, 2, 2}, {2, 1, 3, 0}, {0, 1, 1, 1}, {1, 1, 2, 2}, {2, 1, 3, 0}};
  EXPECT_EQ(trajs[0].transitions, expected);
}

TEST(CollectTrajectories, SeedDeterminismAndErrors) {
  const auto mdp = small_mdp(3);
  const auto mu = PolicyTable::uniform(5, 3);
  Rng a(4), b(4);
  const auto ta = collect_trajectories(mdp, mu, 3, 10, 0, a);
  const auto tb = collect_trajectories(mdp, mu, 3, 10, 0, b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(ta[i].transitions, tb[i].transitions);
  EXPECT_THROW(collect_trajectories(mdp, mu, 3, 10, 5, a), ParameterError);
  EXPECT_THROW(collect_trajectories(mdp, mu, 0, 10, 0, a), ParameterError);
  EXPECT_THROW(collect_trajectories(mdp, mu, 3, 0, 0, a), ParameterError);
}

TEST(SampleTransition, RewardNoiseHasRequestedMean) {
  Rng mrng(5);
  RewardSpec spec;
  spec.noise_std = 0.5;
  const auto mdp = generate_random_mdp(3, 2, 0.9, 0.5, spec, mrng);
  const std::vector<int> actions{0, 0, 0};
  const auto mu = PolicyTable::deterministic(actions, 2);
  Rng rng(6);
  double sum = 0.0;
  std::set<double> distinct;
  for (int i = 0; i < 20000; ++i) {
    const auto t = sample_transition(mdp, mu, 1, rng);
    sum += t.r;
    distinct.insert(t.r);
  }
  EXPECT_GT(distinct.size(), 1000u);
  EXPECT_NEAR(sum / 20000, mdp.reward(1, 0), 0.02);
}

TEST(TransitionStream, EpochCountsAndOrder) {
  Rng mrng(7);
  const auto mdp = generate_random_mdp(20, 5, 0.99, 0.5, RewardSpec{}, mrng);
  Rng rng(8);
  const auto trajs = collect_trajectories(mdp, PolicyTable::uniform(20, 5), 20, 200, 0, rng);
  TransitionStream seq(trajs, StreamOrder::sequential, Rng(1));
  EXPECT_EQ(seq.epoch_size(), 4000u);
  const auto flat = flatten(trajs);
  for (std::size_t i = 0; i < flat.size(); ++i) ASSERT_EQ(seq.next(), flat[i]);
  EXPECT_EQ(seq.epoch(), 0);
  EXPECT_EQ(seq.next(), flat[0]);
  EXPECT_EQ(seq.epoch(), 1);
}

TEST(TransitionStream, ShuffledIsSeededPermutation) {
  const auto mdp = small_mdp(9);
  Rng rng(10);
  const auto trajs = collect_trajectories(mdp, PolicyTable::uniform(5, 3), 4, 25, 0, rng);
  TransitionStream a(trajs, StreamOrder::shuffled, Rng(77));
  TransitionStream b(trajs, StreamOrder::shuffled, Rng(77));
  EXPECT_EQ(a.permutation(), b.permutation());
  auto sorted = a.permutation();
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], i);
  std::vector<std::size_t> identity(sorted);
  EXPECT_NE(a.permutation(), identity);
  const auto first = a.permutation();
  for (std::size_t i = 0; i <= a.epoch_size(); ++i) a.next();
  EXPECT_EQ(a.epoch(), 1);
  EXPECT_NE(a.permutation(), first);
}

TEST(BehaviorEstimate, SingleObservationAndFallbacks) {
  BehaviorEstimate est(3, 4);
  est.observe(Transition{0, 3, 0.0, 1});
  const auto pi = est.estimated_policy();
  EXPECT_EQ(pi(0, 3), 1.0);
  EXPECT_EQ(pi(0, 0), 0.0);
  for (int a = 0; a < 4; ++a) EXPECT_EQ(pi(1, a), 0.25);
  EXPECT_EQ(est.count(0, 3), 1);

  BehaviorEstimate smoothed(2, 4, 1.0);
  for (int a = 0; a < 4; ++a) EXPECT_EQ(smoothed.estimated_policy()(0, a), 0.25);
  smoothed.observe(Transition{0, 1, 0.0, 0});
  EXPECT_DOUBLE_EQ(smoothed.estimated_policy()(0, 1), 2.0 / 5.0);
  EXPECT_THROW(BehaviorEstimate(2, 2, -1.0), ParameterError);
}

TEST(BehaviorEstimate, ConvergesToSamplingPolicy) {
  Matrix row(1, 4);
  row << 0.1, 0.2, 0.3, 0.4;
  const PolicyTable mu(row);
  const TabularMdp mdp(1, 4, Matrix::Ones(4, 1), Matrix::Zero(1, 4), 0.5);
  Rng rng(11);
  BehaviorEstimate est(1, 4);
  for (int i = 0; i < 10000; ++i) est.observe(sample_transition(mdp, mu, 0, rng));
  EXPECT_LE((est.estimated_policy().matrix() - row).cwiseAbs().maxCoeff(), 0.02);
}

TEST(BehaviorEstimate, VisitationFrequenciesFollowMu) {
  const auto mdp = small_mdp(12);
  Rng prng(13);
  Matrix probs(5, 3);
  for (int x = 0; x < 5; ++x) {
    for (int a = 0; a < 3; ++a) probs(x, a) = 0.2 + prng.uniform();
    probs.row(x) /= probs.row(x).sum();
  }
  const PolicyTable mu(probs);
  Rng rng(14);
  const auto trajs = collect_trajectories(mdp, mu, 1, 100000, 0, rng);
  BehaviorEstimate est(5, 3);
  est.observe(trajs[0].transitions);
  const auto hat = est.estimated_policy();
  for (int x = 0; x < 5; ++x) {
    std::int64_t visits = 0;
    for (int a = 0; a < 3; ++a) visits += est.count(x, a);
    if (visits < 2000) continue;
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(hat(x, a), mu(x, a), 0.02);
  }
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const auto mdp = small_mdp(15);
  Rng rng(16);
  const auto trajs = collect_trajectories(mdp, PolicyTable::uniform(5, 3), 2, 3, 0, rng);
  const auto path = std::filesystem::temp_directory_path() / "valab_traj_test.csv";
  write_trajectories_csv(path, trajs);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "traj_id,step,x,a,r,x_next");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
  std::filesystem::remove(path);
  EXPECT_THROW(write_trajectories_csv("/nonexistent-dir/x.csv", trajs), IoError);
}
