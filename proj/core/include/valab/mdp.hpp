#pragma once

#include <cstdint>
#include <optional>

#include "valab/policy.hpp"
#include "valab/rng.hpp"
#include "valab/tables.hpp"

namespace valab {

/// Finite discounted MDP with deterministic mean rewards.
///
/// The transition tensor is stored flattened as a (S*A) x S row-major matrix
/// whose row x*A + a is p(. | x, a). Rewards are point masses at reward_mean;
/// samplers may add zero-mean Gaussian noise with reward_noise_std.
class TabularMdp {
 public:
  TabularMdp(int num_states, int num_actions, Matrix transition, Matrix reward_mean, double gamma,
             double reward_noise_std = 0.0, std::optional<std::uint64_t> generator_seed = std::nullopt);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double gamma() const { return gamma_; }
  double reward_noise_std() const { return reward_noise_std_; }
  std::optional<std::uint64_t> generator_seed() const { return generator_seed_; }

  double transition(int x, int a, int next) const { return transition_(row_index(x, a), next); }
  auto transition_row(int x, int a) const { return transition_.row(row_index(x, a)); }
  /// The flattened (S*A) x S kernel.
  const Matrix& transition_matrix() const { return transition_; }

  double reward(int x, int a) const { return reward_mean_(x, a); }
  const Matrix& reward_mean() const { return reward_mean_; }

  int row_index(int x, int a) const { return x * num_actions_ + a; }

  friend bool operator==(const TabularMdp& lhs, const TabularMdp& rhs);

 private:
  int num_states_;
  int num_actions_;
  Matrix transition_;
  Matrix reward_mean_;
  double gamma_;
  double reward_noise_std_;
  std::optional<std::uint64_t> generator_seed_;
};

/// How generate_random_mdp fills reward_mean.
struct RewardSpec {
  enum class Kind { uniform01, zero };
  Kind kind = Kind::uniform01;
  /// Std of additive Gaussian reward noise applied at sample time.
  double noise_std = 0.0;

  static RewardSpec zero() { return {Kind::zero, 0.0}; }
};

/// Random MDP with i.i.d. Dirichlet(alpha, ..., alpha) transition rows
/// (normalized Gamma draws) and rewards per `rewards`.
TabularMdp generate_random_mdp(int num_states, int num_actions, double gamma, double dirichlet_alpha,
                               const RewardSpec& rewards, Rng& rng);

/// epsilon * uniform + (1 - epsilon) * pi_det. pi_det must be one-hot.
PolicyTable mixed_policy(double epsilon, const PolicyTable& pi_det);

/// One-hot rows on uniformly drawn actions.
PolicyTable random_deterministic_policy(int num_states, int num_actions, Rng& rng);

/// Two-state chain: x --(a or b)--> y, y absorbing; r(y, a) = 1, every other
/// reward 0; gamma = 0.99.
TabularMdp demo_two_state_mdp();

namespace demo {
inline constexpr int kStateX = 0;
inline constexpr int kStateY = 1;
inline constexpr int kActionA = 0;
inline constexpr int kActionB = 1;
inline constexpr double kGamma = 0.99;
}  // namespace demo

}  // namespace valab
