#include "valab/dp.hpp"

#include <Eigen/LU>
#include <cmath>
#include <vector>

namespace valab {
namespace {

void check_q_shape(const QTable& q, const TabularMdp& mdp, const char* where) {
  if (q.num_states() != mdp.num_states() || q.num_actions() != mdp.num_actions())
    throw ParameterError(std::string(where) + ": table shape does not match the MDP");
}

void check_policy_shape(const PolicyTable& pi, const TabularMdp& mdp, const char* where) {
  if (pi.num_states() != mdp.num_states() || pi.num_actions() != mdp.num_actions())
    throw ParameterError(std::string(where) + ": policy shape does not match the MDP");
}

// r + discount * P next_values, reshaped to S x A.
QTable backup_from_next_values(const TabularMdp& mdp, const Vector& next_values, double discount) {
  const Vector expected = mdp.transition_matrix() * next_values;
  Matrix out = Eigen::Map<const Matrix>(expected.data(), mdp.num_states(), mdp.num_actions());
  out = mdp.reward_mean() + discount * out;
  return QTable(std::move(out));
}

Vector next_values(const QTable& q, const BackupMode& mode) {
  if (mode.is_control()) return q.matrix().rowwise().maxCoeff();
  return mode.target_policy().average(q);
}

double residual(const QTable& q, const BackupMode& mode, const TabularMdp& mdp) {
  return sup_norm_distance(bellman(q, mode, mdp), q);
}

}  // namespace

const PolicyTable& BackupMode::target_policy() const {
  if (!pi_) throw MisuseError("BackupMode: control mode has no fixed target policy");
  return *pi_;
}

QTable bellman_eval(const QTable& q, const PolicyTable& pi, const TabularMdp& mdp) {
  check_q_shape(q, mdp, "bellman_eval");
  check_policy_shape(pi, mdp, "bellman_eval");
  return backup_from_next_values(mdp, pi.average(q), mdp.gamma());
}

QTable bellman_control(const QTable& q, const TabularMdp& mdp) {
  check_q_shape(q, mdp, "bellman_control");
  return backup_from_next_values(mdp, q.matrix().rowwise().maxCoeff(), mdp.gamma());
}

QTable bellman(const QTable& q, const BackupMode& mode, const TabularMdp& mdp) {
  return detail::bellman_with_discount(q, mode, mdp, mdp.gamma());
}

namespace detail {
QTable bellman_with_discount(const QTable& q, const BackupMode& mode, const TabularMdp& mdp,
                             double discount) {
  check_q_shape(q, mdp, "bellman");
  if (!mode.is_control()) check_policy_shape(mode.target_policy(), mdp, "bellman");
  return backup_from_next_values(mdp, next_values(q, mode), discount);
}
}  // namespace detail

ValueIterationResult value_iteration(const TabularMdp& mdp, const BackupMode& mode, double tol,
                                     std::optional<QTable> init) {
  if (!(tol > 0.0)) throw ParameterError("value_iteration: tol must be positive");
  QTable q = init ? std::move(*init) : QTable(mdp.num_states(), mdp.num_actions());
  check_q_shape(q, mdp, "value_iteration");
  ValueIterationResult result;
  for (;;) {
    QTable next = bellman(q, mode, mdp);
    const double diff = sup_norm_distance(next, q);
    if (diff <= tol) {
      result.q = std::move(q);
      result.residual = diff;
      return result;
    }
    q = std::move(next);
    ++result.iterations;
  }
}

QTable solve_q_pi(const TabularMdp& mdp, const PolicyTable& pi, double tol) {
  if (!(tol > 0.0)) throw ParameterError("solve_q_pi: tol must be positive");
  check_policy_shape(pi, mdp, "solve_q_pi");
  const int num_states = mdp.num_states();
  const int num_actions = mdp.num_actions();
  const int n = num_states * num_actions;
  const BackupMode mode = BackupMode::evaluation(pi);
  if (n > kDenseSolveLimit) return value_iteration(mdp, mode, tol).q;

  // (I - gamma P Pi) q = r with (P Pi)(i, x' A + b) = P(x'|i) pi(b|x').
  Matrix system = Matrix::Identity(n, n);
  const Matrix& kernel = mdp.transition_matrix();
  for (int i = 0; i < n; ++i)
    for (int next = 0; next < num_states; ++next) {
      const double p = kernel(i, next);
      if (p == 0.0) continue;
      for (int b = 0; b < num_actions; ++b)
        system(i, next * num_actions + b) -= mdp.gamma() * p * pi(next, b);
    }
  const Vector rhs = Eigen::Map<const Vector>(mdp.reward_mean().data(), n);
  const Eigen::PartialPivLU<Matrix> lu(system);
  Vector solution = lu.solve(rhs);
  if (!solution.allFinite()) throw InternalError("solve_q_pi: singular evaluation system");
  QTable q(Matrix(Eigen::Map<const Matrix>(solution.data(), num_states, num_actions)));

  // One refinement pass handles gamma close to 1.
  for (int pass = 0; pass < 8 && residual(q, mode, mdp) > tol; ++pass) {
    const Vector q_flat = Eigen::Map<const Vector>(q.matrix().data(), n);
    const Vector correction = lu.solve(rhs - system * q_flat);
    const Vector refined = q_flat + correction;
    q = QTable(Matrix(Eigen::Map<const Matrix>(refined.data(), num_states, num_actions)));
  }
  if (residual(q, mode, mdp) > tol) return value_iteration(mdp, mode, tol, std::move(q)).q;
  return q;
}

QTable solve_q_star(const TabularMdp& mdp, double tol) {
  if (!(tol > 0.0)) throw ParameterError("solve_q_star: tol must be positive");
  const BackupMode control = BackupMode::control();
  ValueIterationResult vi = value_iteration(mdp, control, tol);
  QTable polished = solve_q_pi(mdp, greedy(vi.q), tol);
  if (residual(polished, control, mdp) <= vi.residual) return polished;
  return std::move(vi.q);
}

QTable VaPair::implied_q() const {
  if (a.num_states() != v.num_states()) throw ParameterError("VaPair: V and A disagree on |X|");
  return QTable(Matrix(a.matrix().colwise() + v.vector()));
}

ExactTargets mu_targets(const TabularMdp& mdp, const PolicyTable& mu, const BackupMode& mode, double tol) {
  check_policy_shape(mu, mdp, "mu_targets");
  if (!mu.full_coverage()) throw ParameterError("mu_targets: mu must have full coverage");
  ExactTargets targets;
  targets.control = mode.is_control();
  targets.q_star = solve_q_star(mdp, tol);
  targets.q_pi = targets.control ? targets.q_star : solve_q_pi(mdp, mode.target_policy(), tol);

  targets.v_mu_pi = ValueTable(mu.average(targets.q_pi));
  targets.a_mu_pi = AdvTable(Matrix(targets.q_pi.matrix().colwise() - targets.v_mu_pi.vector()));
  targets.v_mu_star = ValueTable(mu.average(targets.q_star));
  targets.a_mu_star = AdvTable(Matrix(targets.q_star.matrix().colwise() - targets.v_mu_star.vector()));
  return targets;
}

QTable transformed_q(const VaPair& pair, const PolicyTable& mu) {
  const Vector adv_mean = mu.average(pair.a);
  return QTable(Matrix((pair.a.matrix().colwise() - adv_mean).colwise() + pair.v.vector()));
}

VaPair va_recursion_step(const VaPair& pair, const TabularMdp& mdp, const PolicyTable& mu,
                         const BackupMode& mode) {
  if (pair.v.num_states() != mdp.num_states() || pair.a.num_states() != mdp.num_states() ||
      pair.a.num_actions() != mdp.num_actions())
    throw ParameterError("va_recursion_step: pair shape does not match the MDP");
  check_policy_shape(mu, mdp, "va_recursion_step");
  const QTable backed_up = bellman(transformed_q(pair, mu), mode, mdp);
  VaPair next;
  next.v = ValueTable(mu.average(backed_up));
  next.a = AdvTable(Matrix(backed_up.matrix().colwise() - pair.v.vector()));
  return next;
}

std::vector<int> greedy_actions(const QTable& q) {
  std::vector<int> actions(static_cast<std::size_t>(q.num_states()), 0);
  for (int x = 0; x < q.num_states(); ++x) {
    int best = 0;
    for (int a = 1; a < q.num_actions(); ++a)
      if (q(x, a) > q(x, best)) best = a;
    actions[static_cast<std::size_t>(x)] = best;
  }
  return actions;
}

PolicyTable greedy(const QTable& q) {
  if (q.num_states() < 1 || q.num_actions() < 1) throw ParameterError("greedy: empty table");
  return PolicyTable::deterministic(greedy_actions(q), q.num_actions());
}

ValueTable policy_value(const TabularMdp& mdp, const PolicyTable& pi, double tol) {
  return ValueTable(pi.average(solve_q_pi(mdp, pi, tol)));
}

double policy_performance(const TabularMdp& mdp, const QTable& q, double tol) {
  check_q_shape(q, mdp, "policy_performance");
  return policy_value(mdp, greedy(q), tol).vector().mean();
}

}  // namespace valab
