#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "valab/dp.hpp"
#include "valab/mdp.hpp"
#include "valab/policy.hpp"
#include "valab/rng.hpp"
#include "valab/sampler.hpp"
#include "valab/tables.hpp"

namespace valab {

/// Step-size sequence. Robbins-Monro: alpha_t = c / (t + t0)^p, p in (0.5, 1].
struct LrSchedule {
  enum class Kind { constant, robbins_monro };
  Kind kind = Kind::constant;
  double lr = 0.1;
  double c = 1.0;
  double t0 = 10.0;
  double exponent = 1.0;

  static LrSchedule constant(double lr);
  static LrSchedule robbins_monro(double c, double t0, double exponent);
  void validate() const;
};

double lr_at(const LrSchedule& schedule, std::int64_t t);

/// Per-sample loss applied to a residual (prediction - target). The huber
/// form is x^2 for |x| <= tau and |x| beyond; both kinds carry the 1/2.
struct Loss {
  enum class Kind { square, huber };
  Kind kind = Kind::square;
  double tau = 1.0;

  static Loss square() { return {}; }
  static Loss huber(double tau = 1.0) { return {Kind::huber, tau}; }

  double value(double residual) const;
  double derivative(double residual) const;
};

enum class UpdateStyle { incremental, batch_gradient, synchronous_sa };

/// Table parameterizations trained on the Q-learning loss.
enum class Parameterization { plain, uniform_dueling, behavior_dueling };

struct LearnSpec {
  BackupMode mode = BackupMode::control();
  double gamma = 0.99;
  LrSchedule schedule = LrSchedule::constant(0.1);
  /// Target tables are hard-copied from the online ones every this many updates.
  int target_period = 10;
  int n_step = 1;
  Loss loss = Loss::square();
  /// VA advantage target subtracts the online V(x_t) instead of the target V.
  bool online_value_baseline = false;
  UpdateStyle update_style = UpdateStyle::batch_gradient;

  void validate() const;
};

/// A transition followed by up to n_step - 1 successors from the same
/// trajectory; element 0 is the transition being updated.
using Segment = std::span<const Transition>;

/// One segment per transition, truncated at the trajectory end.
std::vector<Segment> make_segments(std::span<const Trajectory> trajectories, int n_step);
/// Single-transition segments.
std::vector<Segment> single_step_segments(std::span<const Transition> transitions);

struct NStepReturn {
  double rewards = 0.0;   ///< sum_{k<m} gamma^k r_k
  double discount = 1.0;  ///< gamma^m
  int bootstrap_state = 0;
};

/// m = min(n_step, segment length) steps of the segment.
NStepReturn nstep_return(Segment segment, double gamma, int n_step);

// --- Q-function learners (TD-learning / Q-learning) ------------------------

struct QLearnerState {
  QTable q;
  QTable q_target;
  std::int64_t step_count = 0;

  static QLearnerState zeros(int num_states, int num_actions);
};

/// sum gamma^k r_k + gamma^m bootstrap(q_target, x_m).
double q_backup_target(const QLearnerState& state, Segment segment, const LearnSpec& spec);

/// Q(x_t, a_t) <- Q + alpha (target - Q). Requires evaluation mode.
void td_update(QLearnerState& state, Segment segment, const LearnSpec& spec);
void td_update(QLearnerState& state, const Transition& t, const LearnSpec& spec);
/// Same with the max backup. Requires control mode.
void q_update(QLearnerState& state, Segment segment, const LearnSpec& spec);
void q_update(QLearnerState& state, const Transition& t, const LearnSpec& spec);

// --- VA-learning -----------------------------------------------------------

struct VaLearnerState {
  ValueTable v;
  AdvTable adv;
  ValueTable v_target;
  AdvTable adv_target;
  std::int64_t step_count = 0;

  static VaLearnerState zeros(int num_states, int num_actions);

  QTable implied_q() const;
  QTable implied_target_q() const;
  bool targets_match_online() const { return v == v_target && adv == adv_target; }
  /// Copies the online tables into the target tables.
  void sync_targets();
};

/// Shared back-up target of the V and A updates:
///   sum gamma^k r_k + gamma^m (bootstrap(V~ + A~, x_m) - A~(x_m, mu_hat)),
/// with ~ denoting target tables.
double va_backup_target(const VaLearnerState& state, Segment segment, const PolicyTable& mu_hat,
                        const LearnSpec& spec);

/// Tabular VA-learning step: V(x_t) <- target, A(x_t, a_t) <- target - V_b(x_t),
/// both with step lr_at(step_count). V_b is the target V unless
/// spec.online_value_baseline, then the pre-update online V.
void va_update(VaLearnerState& state, Segment segment, const PolicyTable& mu_hat, const LearnSpec& spec);
void va_update(VaLearnerState& state, const Transition& t, const PolicyTable& mu_hat, const LearnSpec& spec);

// --- Dueling parameterizations ---------------------------------------------

/// Q(x, a) = V(x) + f(x, a) - sum_b nu(b|x) f(x, b). nu uniform gives the
/// classic dueling head; nu = estimated behavior gives behavior dueling.
struct DuelingLearnerState {
  ValueTable v;
  QTable f;
  ValueTable v_target;
  QTable f_target;
  PolicyTable nu;
  std::int64_t step_count = 0;

  static DuelingLearnerState zeros(PolicyTable nu);

  AdvTable advantage() const;
  QTable implied_q() const;
  QTable implied_target_q() const;
};

// --- Gradients of the tabular losses ----------------------------------------

struct DuelingGradient {
  Vector v;
  Matrix f;
};

struct VaGradient {
  Vector v;
  Matrix adv;
};

/// Adds weight * d/dQ of the Q-learning loss on one sample.
void accumulate_gradient(const QLearnerState& state, Segment segment, const LearnSpec& spec, double weight,
                         Matrix& grad_q);
/// Adds weight * d/d(V, f) of the Q-learning loss under the dueling head.
void accumulate_gradient(const DuelingLearnerState& state, Segment segment, const LearnSpec& spec,
                         double weight, DuelingGradient& grad);
/// Adds weight * d/d(V, A) of 1/2 (V - V^)^2 + 1/2 (A - A^)^2.
void accumulate_gradient(const VaLearnerState& state, Segment segment, const PolicyTable& mu_hat,
                         const LearnSpec& spec, double weight, VaGradient& grad);

/// One full-batch gradient step (mean over the batch) at lr_at(step_count).
void grad_step_qlearning(QLearnerState& state, std::span<const Segment> batch, const LearnSpec& spec);
void grad_step_qlearning(DuelingLearnerState& state, std::span<const Segment> batch, const LearnSpec& spec);
void grad_step_va(VaLearnerState& state, std::span<const Segment> batch, const PolicyTable& mu_hat,
                  const LearnSpec& spec);

/// Simultaneous sampled VA-learning update at every state: for each x draw
/// a ~ mu(.|x), r, x' ~ P(.|x, a) and apply the VA update at x, all against
/// the pre-step tables. No target lag: targets equal the online tables.
void synchronous_sa_step(VaLearnerState& state, const TabularMdp& mdp, const PolicyTable& mu,
                         const LearnSpec& spec, Rng& rng);

}  // namespace valab
