#include "valab/mdp.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace valab {

TabularMdp::TabularMdp(int num_states, int num_actions, Matrix transition, Matrix reward_mean,
                       double gamma, double reward_noise_std,
                       std::optional<std::uint64_t> generator_seed)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      reward_mean_(std::move(reward_mean)),
      gamma_(gamma),
      reward_noise_std_(reward_noise_std),
      generator_seed_(generator_seed) {
  if (num_states_ < 1 || num_actions_ < 1) throw ParameterError("TabularMdp: dimensions must be positive");
  if (transition_.rows() != static_cast<Eigen::Index>(num_states_) * num_actions_ ||
      transition_.cols() != num_states_)
    throw ParameterError("TabularMdp: transition must be (S*A) x S");
  if (reward_mean_.rows() != num_states_ || reward_mean_.cols() != num_actions_)
    throw ParameterError("TabularMdp: reward_mean must be S x A");
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw ParameterError("TabularMdp: gamma must lie in [0, 1)");
  if (!(reward_noise_std_ >= 0.0) || !std::isfinite(reward_noise_std_))
    throw ParameterError("TabularMdp: reward_noise_std must be finite and >= 0");
  if (!reward_mean_.allFinite()) throw ParameterError("TabularMdp: rewards must be finite");
  for (Eigen::Index row = 0; row < transition_.rows(); ++row) {
    double sum = 0.0;
    for (Eigen::Index next = 0; next < transition_.cols(); ++next) {
      const double p = transition_(row, next);
      if (!std::isfinite(p) || p < 0.0)
        throw ParameterError("TabularMdp: negative transition probability in row " + std::to_string(row));
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance)
      throw ParameterError("TabularMdp: transition row " + std::to_string(row) + " does not sum to 1");
  }
}

bool operator==(const TabularMdp& lhs, const TabularMdp& rhs) {
  return lhs.num_states_ == rhs.num_states_ && lhs.num_actions_ == rhs.num_actions_ &&
         lhs.gamma_ == rhs.gamma_ && lhs.reward_noise_std_ == rhs.reward_noise_std_ &&
         lhs.generator_seed_ == rhs.generator_seed_ && lhs.transition_ == rhs.transition_ &&
         lhs.reward_mean_ == rhs.reward_mean_;
}

TabularMdp generate_random_mdp(int num_states, int num_actions, double gamma, double dirichlet_alpha,
                               const RewardSpec& rewards, Rng& rng) {
  if (num_states < 2) throw ParameterError("generate_random_mdp: need at least 2 states");
  if (num_actions < 1) throw ParameterError("generate_random_mdp: need at least 1 action");
  if (!(dirichlet_alpha > 0.0) || !std::isfinite(dirichlet_alpha))
    throw ParameterError("generate_random_mdp: dirichlet_alpha must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("generate_random_mdp: gamma must lie in [0, 1)");
  if (!(rewards.noise_std >= 0.0)) throw ParameterError("generate_random_mdp: noise_std must be >= 0");

  const std::uint64_t seed = rng.seed();
  Matrix transition(static_cast<Eigen::Index>(num_states) * num_actions, num_states);
  for (Eigen::Index row = 0; row < transition.rows(); ++row) {
    double total = 0.0;
    for (int next = 0; next < num_states; ++next) {
      transition(row, next) = rng.gamma(dirichlet_alpha);
      total += transition(row, next);
    }
    // Tiny alpha can underflow every Gamma draw; fall back to a point mass.
    if (!(total > 0.0)) {
      transition.row(row).setZero();
      transition(row, static_cast<Eigen::Index>(rng.uniform_index(num_states))) = 1.0;
      continue;
    }
    transition.row(row) /= total;
  }

  Matrix reward_mean = Matrix::Zero(num_states, num_actions);
  if (rewards.kind == RewardSpec::Kind::uniform01) {
    for (int x = 0; x < num_states; ++x)
      for (int a = 0; a < num_actions; ++a) reward_mean(x, a) = rng.uniform();
  }
  return TabularMdp(num_states, num_actions, std::move(transition), std::move(reward_mean), gamma,
                    rewards.noise_std, seed);
}

PolicyTable mixed_policy(double epsilon, const PolicyTable& pi_det) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ParameterError("mixed_policy: epsilon must lie in [0, 1]");
  if (!pi_det.is_deterministic()) throw ParameterError("mixed_policy: pi_det must have one-hot rows");
  const int num_actions = pi_det.num_actions();
  Matrix probs = Matrix::Constant(pi_det.num_states(), num_actions, epsilon / num_actions);
  probs += (1.0 - epsilon) * pi_det.matrix();
  return PolicyTable(std::move(probs));
}

PolicyTable random_deterministic_policy(int num_states, int num_actions, Rng& rng) {
  if (num_states < 1 || num_actions < 1)
    throw ParameterError("random_deterministic_policy: dimensions must be positive");
  std::vector<int> actions(static_cast<std::size_t>(num_states));
  for (auto& a : actions) a = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(num_actions)));
  return PolicyTable::deterministic(actions, num_actions);
}

TabularMdp demo_two_state_mdp() {
  using namespace demo;
  Matrix transition = Matrix::Zero(4, 2);
  transition(kStateX * 2 + kActionA, kStateY) = 1.0;
  transition(kStateX * 2 + kActionB, kStateY) = 1.0;
  transition(kStateY * 2 + kActionA, kStateY) = 1.0;
  transition(kStateY * 2 + kActionB, kStateY) = 1.0;
  Matrix reward = Matrix::Zero(2, 2);
  reward(kStateY, kActionA) = 1.0;
  return TabularMdp(2, 2, std::move(transition), std::move(reward), kGamma);
}

}  // namespace valab
