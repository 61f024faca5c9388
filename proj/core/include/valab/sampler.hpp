#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "valab/mdp.hpp"
#include "valab/policy.hpp"
#include "valab/rng.hpp"

namespace valab {

/// One sampled step (x_t, a_t, r_t, x_{t+1}).
struct Transition {
  int x = 0;
  int a = 0;
  double r = 0.0;
  int x_next = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Trajectory {
  int start_state = 0;
  int truncation_length = 1;
  std::vector<Transition> transitions;
};

/// int(2 / (1 - gamma)), rounded to the closest integer.
int default_horizon(double gamma);

/// a ~ mu(.|x), r = r(x, a) (+ Gaussian noise), x' ~ P(.|x, a).
Transition sample_transition(const TabularMdp& mdp, const PolicyTable& mu, int x, Rng& rng);

/// n_traj trajectories of exactly `horizon` steps from start_state.
std::vector<Trajectory> collect_trajectories(const TabularMdp& mdp, const PolicyTable& mu, int n_traj,
                                             int horizon, int start_state, Rng& rng);

/// Concatenation of every trajectory's transitions, in order.
std::vector<Transition> flatten(std::span<const Trajectory> trajectories);

enum class StreamOrder { sequential, shuffled };

/// Endless stream over a fixed transition set: every transition is yielded
/// exactly once per epoch. Shuffled order draws a fresh permutation at the
/// start of each epoch from the stream's own Rng.
class TransitionStream {
 public:
  TransitionStream(std::span<const Trajectory> trajectories, StreamOrder order, Rng rng);

  const Transition& next();
  std::size_t epoch_size() const { return transitions_.size(); }
  std::int64_t epoch() const { return epoch_; }

  /// Order in which the current epoch visits the transitions.
  const std::vector<std::size_t>& permutation() const { return order_; }
  const std::vector<Transition>& transitions() const { return transitions_; }

 private:
  void start_epoch();

  std::vector<Transition> transitions_;
  std::vector<std::size_t> order_;
  StreamOrder mode_;
  Rng rng_;
  std::size_t cursor_ = 0;
  std::int64_t epoch_ = -1;
};

/// Count-based maximum-likelihood estimate of the average behavior policy.
class BehaviorEstimate {
 public:
  BehaviorEstimate(int num_states, int num_actions, double smoothing = 0.0);

  /// Adds one observation of (t.x, t.a).
  void observe(const Transition& t);
  void observe(std::span<const Transition> transitions);

  std::int64_t count(int x, int a) const;
  double smoothing() const { return smoothing_; }

  /// (counts + smoothing) / (row total + |A| smoothing); rows without any
  /// mass are uniform.
  PolicyTable estimated_policy() const;

 private:
  int num_states_;
  int num_actions_;
  double smoothing_;
  std::vector<std::int64_t> counts_;
};

/// CSV with columns traj_id,step,x,a,r,x_next; rewards in 17 significant digits.
void write_trajectories_csv(const std::filesystem::path& path, std::span<const Trajectory> trajectories);

}  // namespace valab
