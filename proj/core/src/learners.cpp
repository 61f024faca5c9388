#include "valab/learners.hpp"

#include <algorithm>
#include <cmath>

namespace valab {
namespace {

void check_segment(Segment segment) {
  if (segment.empty()) throw ParameterError("empty segment");
}

void check_batch(std::span<const Segment> batch) {
  if (batch.empty()) throw ParameterError("gradient step on an empty batch");
}

void require_evaluation(const LearnSpec& spec, const char* where) {
  if (spec.mode.is_control()) throw MisuseError(std::string(where) + " requires evaluation mode");
}

void require_control(const LearnSpec& spec, const char* where) {
  if (!spec.mode.is_control()) throw MisuseError(std::string(where) + " requires control mode");
}

bool refresh_due(std::int64_t step_count, int period) { return step_count % period == 0; }

// bootstrap over an implied Q = v(x) + table(x, .) - offset, where the offset
// is constant in the action.
template <class Tag>
double implied_bootstrap(const BackupMode& mode, const ValueTable& v, const StateActionTable<Tag>& table,
                         int x) {
  return v(x) + mode.bootstrap(table, x);
}

}  // namespace

LrSchedule LrSchedule::constant(double lr) {
  LrSchedule schedule;
  schedule.lr = lr;
  schedule.validate();
  return schedule;
}

LrSchedule LrSchedule::robbins_monro(double c, double t0, double exponent) {
  LrSchedule schedule;
  schedule.kind = Kind::robbins_monro;
  schedule.c = c;
  schedule.t0 = t0;
  schedule.exponent = exponent;
  schedule.validate();
  return schedule;
}

void LrSchedule::validate() const {
  if (kind == Kind::constant) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ParameterError("constant learning rate must be finite and >= 0");
    return;
  }
  if (!(exponent > 0.5 && exponent <= 1.0))
    throw ParameterError("robbins_monro exponent must lie in (0.5, 1]");
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("robbins_monro c must be positive");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw ParameterError("robbins_monro t0 must be positive");
}

double lr_at(const LrSchedule& schedule, std::int64_t t) {
  schedule.validate();
  if (t < 0) throw ParameterError("lr_at: t must be >= 0");
  if (schedule.kind == LrSchedule::Kind::constant) return schedule.lr;
  return schedule.c / std::pow(static_cast<double>(t) + schedule.t0, schedule.exponent);
}

double Loss::value(double residual) const {
  if (kind == Kind::square || std::abs(residual) <= tau) return 0.5 * residual * residual;
  return 0.5 * std::abs(residual);
}

double Loss::derivative(double residual) const {
  if (kind == Kind::square || std::abs(residual) <= tau) return residual;
  return residual > 0.0 ? 0.5 : -0.5;
}

void LearnSpec::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("LearnSpec: gamma must lie in [0, 1)");
  schedule.validate();
  if (target_period < 1) throw ParameterError("LearnSpec: target_period must be >= 1");
  if (n_step < 1) throw ParameterError("LearnSpec: n_step must be >= 1");
  if (loss.kind == Loss::Kind::huber && !(loss.tau > 0.0)) throw ParameterError("LearnSpec: huber tau must be > 0");
}

std::vector<Segment> make_segments(std::span<const Trajectory> trajectories, int n_step) {
  if (n_step < 1) throw ParameterError("make_segments: n_step must be >= 1");
  std::vector<Segment> segments;
  for (const auto& trajectory : trajectories) {
    const auto& steps = trajectory.transitions;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const std::size_t length = std::min<std::size_t>(static_cast<std::size_t>(n_step), steps.size() - i);
      segments.emplace_back(steps.data() + i, length);
    }
  }
  return segments;
}

std::vector<Segment> single_step_segments(std::span<const Transition> transitions) {
  std::vector<Segment> segments;
  segments.reserve(transitions.size());
  for (const auto& t : transitions) segments.emplace_back(&t, 1);
  return segments;
}

NStepReturn nstep_return(Segment segment, double gamma, int n_step) {
  check_segment(segment);
  const std::size_t steps = std::min<std::size_t>(segment.size(), static_cast<std::size_t>(n_step));
  NStepReturn out;
  for (std::size_t k = 0; k < steps; ++k) {
    out.rewards += out.discount * segment[k].r;
    out.discount *= gamma;
  }
  out.bootstrap_state = segment[steps - 1].x_next;
  return out;
}

// --- Q learners --------------------------------------------------------------

QLearnerState QLearnerState::zeros(int num_states, int num_actions) {
  QLearnerState state;
  state.q = QTable(num_states, num_actions);
  state.q_target = state.q;
  return state;
}

double q_backup_target(const QLearnerState& state, Segment segment, const LearnSpec& spec) {
  const NStepReturn ret = nstep_return(segment, spec.gamma, spec.n_step);
  return ret.rewards + ret.discount * spec.mode.bootstrap(state.q_target, ret.bootstrap_state);
}

namespace {
void incremental_q_step(QLearnerState& state, Segment segment, const LearnSpec& spec) {
  const double alpha = lr_at(spec.schedule, state.step_count);
  const double target = q_backup_target(state, segment, spec);
  double& entry = state.q(segment[0].x, segment[0].a);
  entry += alpha * (target - entry);
  if (refresh_due(++state.step_count, spec.target_period)) state.q_target = state.q;
}
}  // namespace

void td_update(QLearnerState& state, Segment segment, const LearnSpec& spec) {
  require_evaluation(spec, "td_update");
  incremental_q_step(state, segment, spec);
}

void td_update(QLearnerState& state, const Transition& t, const LearnSpec& spec) {
  td_update(state, Segment(&t, 1), spec);
}

void q_update(QLearnerState& state, Segment segment, const LearnSpec& spec) {
  require_control(spec, "q_update");
  incremental_q_step(state, segment, spec);
}

void q_update(QLearnerState& state, const Transition& t, const LearnSpec& spec) {
  q_update(state, Segment(&t, 1), spec);
}

// --- VA-learning -------------------------------------------------------------

VaLearnerState VaLearnerState::zeros(int num_states, int num_actions) {
  VaLearnerState state;
  state.v = ValueTable(num_states);
  state.adv = AdvTable(num_states, num_actions);
  state.sync_targets();
  return state;
}

QTable VaLearnerState::implied_q() const { return QTable(Matrix(adv.matrix().colwise() + v.vector())); }

QTable VaLearnerState::implied_target_q() const {
  return QTable(Matrix(adv_target.matrix().colwise() + v_target.vector()));
}

void VaLearnerState::sync_targets() {
  v_target = v;
  adv_target = adv;
}

double va_backup_target(const VaLearnerState& state, Segment segment, const PolicyTable& mu_hat,
                        const LearnSpec& spec) {
  const NStepReturn ret = nstep_return(segment, spec.gamma, spec.n_step);
  const int x = ret.bootstrap_state;
  const double bootstrap = implied_bootstrap(spec.mode, state.v_target, state.adv_target, x);
  return ret.rewards + ret.discount * (bootstrap - mu_hat.average(state.adv_target, x));
}

void va_update(VaLearnerState& state, Segment segment, const PolicyTable& mu_hat, const LearnSpec& spec) {
  const double alpha = lr_at(spec.schedule, state.step_count);
  const double target = va_backup_target(state, segment, mu_hat, spec);
  const int x = segment[0].x;
  const int a = segment[0].a;
  const double baseline = spec.online_value_baseline ? state.v(x) : state.v_target(x);
  state.v(x) += alpha * (target - state.v(x));
  state.adv(x, a) += alpha * (target - baseline - state.adv(x, a));
  if (refresh_due(++state.step_count, spec.target_period)) state.sync_targets();
}

void va_update(VaLearnerState& state, const Transition& t, const PolicyTable& mu_hat, const LearnSpec& spec) {
  va_update(state, Segment(&t, 1), mu_hat, spec);
}

// --- Dueling -----------------------------------------------------------------

DuelingLearnerState DuelingLearnerState::zeros(PolicyTable nu) {
  DuelingLearnerState state;
  state.v = ValueTable(nu.num_states());
  state.f = QTable(nu.num_states(), nu.num_actions());
  state.v_target = state.v;
  state.f_target = state.f;
  state.nu = std::move(nu);
  return state;
}

AdvTable DuelingLearnerState::advantage() const {
  return AdvTable(Matrix(f.matrix().colwise() - nu.average(f)));
}

QTable DuelingLearnerState::implied_q() const {
  return QTable(Matrix(advantage().matrix().colwise() + v.vector()));
}

QTable DuelingLearnerState::implied_target_q() const {
  const Vector offset = v_target.vector() - nu.average(f_target);
  return QTable(Matrix(f_target.matrix().colwise() + offset));
}

// --- Gradients -----------------------------------------------------------------

void accumulate_gradient(const QLearnerState& state, Segment segment, const LearnSpec& spec, double weight,
                         Matrix& grad_q) {
  const int x = segment[0].x;
  const int a = segment[0].a;
  const double target = q_backup_target(state, segment, spec);
  grad_q(x, a) += weight * spec.loss.derivative(state.q(x, a) - target);
}

void accumulate_gradient(const DuelingLearnerState& state, Segment segment, const LearnSpec& spec,
                         double weight, DuelingGradient& grad) {
  const NStepReturn ret = nstep_return(segment, spec.gamma, spec.n_step);
  const int next = ret.bootstrap_state;
  const double bootstrap =
      implied_bootstrap(spec.mode, state.v_target, state.f_target, next) - state.nu.average(state.f_target, next);
  const double target = ret.rewards + ret.discount * bootstrap;

  const int x = segment[0].x;
  const int a = segment[0].a;
  const double prediction = state.v(x) + state.f(x, a) - state.nu.average(state.f, x);
  const double g = weight * spec.loss.derivative(prediction - target);
  // dQ(x,a)/dV(x) = 1, dQ(x,a)/df(x,b) = [b == a] - nu(b|x).
  grad.v(x) += g;
  for (int b = 0; b < state.f.num_actions(); ++b) grad.f(x, b) -= g * state.nu(x, b);
  grad.f(x, a) += g;
}

void accumulate_gradient(const VaLearnerState& state, Segment segment, const PolicyTable& mu_hat,
                         const LearnSpec& spec, double weight, VaGradient& grad) {
  const int x = segment[0].x;
  const int a = segment[0].a;
  const double value_target = va_backup_target(state, segment, mu_hat, spec);
  const double baseline = spec.online_value_baseline ? state.v(x) : state.v_target(x);
  const double adv_target = value_target - baseline;
  grad.v(x) += weight * spec.loss.derivative(state.v(x) - value_target);
  grad.adv(x, a) += weight * spec.loss.derivative(state.adv(x, a) - adv_target);
}

void grad_step_qlearning(QLearnerState& state, std::span<const Segment> batch, const LearnSpec& spec) {
  check_batch(batch);
  const double lr = lr_at(spec.schedule, state.step_count);
  const double weight = 1.0 / static_cast<double>(batch.size());
  Matrix grad = Matrix::Zero(state.q.num_states(), state.q.num_actions());
  for (const auto& segment : batch) accumulate_gradient(state, segment, spec, weight, grad);
  state.q.matrix() -= lr * grad;
  if (refresh_due(++state.step_count, spec.target_period)) state.q_target = state.q;
}

void grad_step_qlearning(DuelingLearnerState& state, std::span<const Segment> batch, const LearnSpec& spec) {
  check_batch(batch);
  const double lr = lr_at(spec.schedule, state.step_count);
  const double weight = 1.0 / static_cast<double>(batch.size());
  DuelingGradient grad{Vector::Zero(state.v.num_states()),
                       Matrix::Zero(state.f.num_states(), state.f.num_actions())};
  for (const auto& segment : batch) accumulate_gradient(state, segment, spec, weight, grad);
  state.v.vector() -= lr * grad.v;
  state.f.matrix() -= lr * grad.f;
  if (refresh_due(++state.step_count, spec.target_period)) {
    state.v_target = state.v;
    state.f_target = state.f;
  }
}

void grad_step_va(VaLearnerState& state, std::span<const Segment> batch, const PolicyTable& mu_hat,
                  const LearnSpec& spec) {
  check_batch(batch);
  const double lr = lr_at(spec.schedule, state.step_count);
  const double weight = 1.0 / static_cast<double>(batch.size());
  VaGradient grad{Vector::Zero(state.v.num_states()),
                  Matrix::Zero(state.adv.num_states(), state.adv.num_actions())};
  for (const auto& segment : batch) accumulate_gradient(state, segment, mu_hat, spec, weight, grad);
  state.v.vector() -= lr * grad.v;
  state.adv.matrix() -= lr * grad.adv;
  if (refresh_due(++state.step_count, spec.target_period)) state.sync_targets();
}

void synchronous_sa_step(VaLearnerState& state, const TabularMdp& mdp, const PolicyTable& mu,
                         const LearnSpec& spec, Rng& rng) {
  if (spec.update_style != UpdateStyle::synchronous_sa)
    throw MisuseError("synchronous_sa_step requires update_style synchronous_sa");
  if (spec.schedule.kind != LrSchedule::Kind::robbins_monro)
    throw MisuseError("synchronous_sa_step requires a Robbins-Monro schedule");
  if (state.v.num_states() != mdp.num_states() || state.adv.num_actions() != mdp.num_actions())
    throw ParameterError("synchronous_sa_step: state shape does not match the MDP");

  state.sync_targets();
  const double alpha = lr_at(spec.schedule, state.step_count);
  const int num_states = mdp.num_states();
  std::vector<Transition> samples(static_cast<std::size_t>(num_states));
  std::vector<double> targets(static_cast<std::size_t>(num_states));
  for (int x = 0; x < num_states; ++x) {
    auto& t = samples[static_cast<std::size_t>(x)];
    t = sample_transition(mdp, mu, x, rng);
    targets[static_cast<std::size_t>(x)] = va_backup_target(state, Segment(&t, 1), mu, spec);
  }
  for (int x = 0; x < num_states; ++x) {
    const auto& t = samples[static_cast<std::size_t>(x)];
    const double target = targets[static_cast<std::size_t>(x)];
    state.adv(x, t.a) += alpha * (target - state.v_target(x) - state.adv(x, t.a));
    state.v(x) += alpha * (target - state.v(x));
  }
  ++state.step_count;
  state.sync_targets();
}

}  // namespace valab
