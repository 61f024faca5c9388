#include "valab/sampler.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "valab/format.hpp"

namespace valab {

int default_horizon(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("default_horizon: gamma must lie in [0, 1)");
  return static_cast<int>(std::lround(2.0 / (1.0 - gamma)));
}

Transition sample_transition(const TabularMdp& mdp, const PolicyTable& mu, int x, Rng& rng) {
  Transition t;
  t.x = x;
  t.a = static_cast<int>(rng.categorical(std::span<const double>(mu.matrix().row(x).data(),
                                                                 static_cast<std::size_t>(mu.num_actions()))));
  t.r = mdp.reward(x, t.a);
  if (mdp.reward_noise_std() > 0.0) t.r += mdp.reward_noise_std() * rng.normal();
  const auto row = mdp.transition_row(x, t.a);
  t.x_next = static_cast<int>(
      rng.categorical(std::span<const double>(row.data(), static_cast<std::size_t>(mdp.num_states()))));
  return t;
}

std::vector<Trajectory> collect_trajectories(const TabularMdp& mdp, const PolicyTable& mu, int n_traj,
                                             int horizon, int start_state, Rng& rng) {
  if (n_traj < 1) throw ParameterError("collect_trajectories: n_traj must be >= 1");
  if (horizon < 1) throw ParameterError("collect_trajectories: horizon must be >= 1");
  if (start_state < 0 || start_state >= mdp.num_states())
    throw ParameterError("collect_trajectories: start_state out of range");
  if (mu.num_states() != mdp.num_states() || mu.num_actions() != mdp.num_actions())
    throw ParameterError("collect_trajectories: behavior policy shape does not match the MDP");

  std::vector<Trajectory> trajectories(static_cast<std::size_t>(n_traj));
  for (auto& trajectory : trajectories) {
    trajectory.start_state = start_state;
    trajectory.truncation_length = horizon;
    trajectory.transitions.reserve(static_cast<std::size_t>(horizon));
    int x = start_state;
    for (int step = 0; step < horizon; ++step) {
      trajectory.transitions.push_back(sample_transition(mdp, mu, x, rng));
      x = trajectory.transitions.back().x_next;
    }
  }
  return trajectories;
}

std::vector<Transition> flatten(std::span<const Trajectory> trajectories) {
  std::vector<Transition> out;
  for (const auto& trajectory : trajectories)
    out.insert(out.end(), trajectory.transitions.begin(), trajectory.transitions.end());
  return out;
}

TransitionStream::TransitionStream(std::span<const Trajectory> trajectories, StreamOrder order, Rng rng)
    : transitions_(flatten(trajectories)), mode_(order), rng_(std::move(rng)) {
  if (transitions_.empty()) throw ParameterError("TransitionStream: no transitions");
  order_.resize(transitions_.size());
  start_epoch();
}

void TransitionStream::start_epoch() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (mode_ == StreamOrder::shuffled) {
    // Fisher-Yates on the stream's own generator.
    for (std::size_t i = order_.size() - 1; i > 0; --i)
      std::swap(order_[i], order_[rng_.uniform_index(i + 1)]);
  }
  cursor_ = 0;
  ++epoch_;
}

const Transition& TransitionStream::next() {
  if (cursor_ == order_.size()) start_epoch();
  return transitions_[order_[cursor_++]];
}

BehaviorEstimate::BehaviorEstimate(int num_states, int num_actions, double smoothing)
    : num_states_(num_states), num_actions_(num_actions), smoothing_(smoothing) {
  if (num_states < 1 || num_actions < 1) throw ParameterError("BehaviorEstimate: bad dimensions");
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing))
    throw ParameterError("BehaviorEstimate: smoothing must be finite and >= 0");
  counts_.assign(static_cast<std::size_t>(num_states) * num_actions, 0);
}

void BehaviorEstimate::observe(const Transition& t) {
  if (t.x < 0 || t.x >= num_states_ || t.a < 0 || t.a >= num_actions_)
    throw ParameterError("BehaviorEstimate: transition out of bounds");
  ++counts_[static_cast<std::size_t>(t.x) * num_actions_ + t.a];
}

void BehaviorEstimate::observe(std::span<const Transition> transitions) {
  for (const auto& t : transitions) observe(t);
}

std::int64_t BehaviorEstimate::count(int x, int a) const {
  return counts_[static_cast<std::size_t>(x) * num_actions_ + a];
}

PolicyTable BehaviorEstimate::estimated_policy() const {
  Matrix probs(num_states_, num_actions_);
  for (int x = 0; x < num_states_; ++x) {
    double total = 0.0;
    for (int a = 0; a < num_actions_; ++a) total += static_cast<double>(count(x, a)) + smoothing_;
    if (total <= 0.0) {
      probs.row(x).setConstant(1.0 / num_actions_);
      continue;
    }
    for (int a = 0; a < num_actions_; ++a) probs(x, a) = (static_cast<double>(count(x, a)) + smoothing_) / total;
  }
  return PolicyTable(std::move(probs));
}

void write_trajectories_csv(const std::filesystem::path& path, std::span<const Trajectory> trajectories) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "traj_id,step,x,a,r,x_next\n";
  for (std::size_t id = 0; id < trajectories.size(); ++id) {
    const auto& transitions = trajectories[id].transitions;
    for (std::size_t step = 0; step < transitions.size(); ++step) {
      const auto& t = transitions[step];
      out << id << ',' << step << ',' << t.x << ',' << t.a << ',' << format_double(t.r) << ',' << t.x_next
          << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace valab
