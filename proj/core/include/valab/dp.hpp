#pragma once

#include <optional>

#include "valab/mdp.hpp"
#include "valab/policy.hpp"
#include "valab/tables.hpp"

namespace valab {

/// Default sup-norm tolerance of the exact solvers.
inline constexpr double kSolverTolerance = 1e-10;
/// Largest |X||A| solved by dense LU; larger systems use value iteration.
inline constexpr int kDenseSolveLimit = 4096;

/// Which Bellman operator a backup uses: evaluation of a fixed target
/// policy, or control (max over next actions).
class BackupMode {
 public:
  static BackupMode evaluation(PolicyTable pi) { return BackupMode(std::move(pi)); }
  static BackupMode control() { return BackupMode(std::nullopt); }

  bool is_control() const { return !pi_.has_value(); }
  /// Throws MisuseError in control mode.
  const PolicyTable& target_policy() const;

  /// Q(x, pi) in evaluation mode, max_a Q(x, a) in control mode.
  template <class Tag>
  double bootstrap(const StateActionTable<Tag>& q, int x) const {
    if (pi_) return pi_->average(q, x);
    return q.matrix().row(x).maxCoeff();
  }

 private:
  explicit BackupMode(std::optional<PolicyTable> pi) : pi_(std::move(pi)) {}

  std::optional<PolicyTable> pi_;
};

/// (T^pi q)(x, a) = r(x, a) + gamma sum_x' P(x'|x, a) sum_b pi(b|x') q(x', b).
QTable bellman_eval(const QTable& q, const PolicyTable& pi, const TabularMdp& mdp);
/// (T^* q)(x, a) = r(x, a) + gamma sum_x' P(x'|x, a) max_b q(x', b).
QTable bellman_control(const QTable& q, const TabularMdp& mdp);
/// Dispatches on the mode.
QTable bellman(const QTable& q, const BackupMode& mode, const TabularMdp& mdp);

namespace detail {
/// The operator of `mode` with an arbitrary discount, used by the
/// verification suite's negative controls.
QTable bellman_with_discount(const QTable& q, const BackupMode& mode, const TabularMdp& mdp,
                             double discount);
}  // namespace detail

struct ValueIterationResult {
  QTable q;
  int iterations = 0;
  /// ||T q - q||_inf of the returned table.
  double residual = 0.0;
};

/// Iterates the mode's operator from `init` until ||T q - q||_inf <= tol.
ValueIterationResult value_iteration(const TabularMdp& mdp, const BackupMode& mode, double tol,
                                     std::optional<QTable> init = std::nullopt);

/// Q^pi. Dense LU on the |X||A| system when it has at most kDenseSolveLimit
/// unknowns, value iteration otherwise.
QTable solve_q_pi(const TabularMdp& mdp, const PolicyTable& pi, double tol = kSolverTolerance);

/// Q^*, by value iteration to `tol` followed by exact evaluation of the
/// greedy policy when that lowers the residual.
QTable solve_q_star(const TabularMdp& mdp, double tol = kSolverTolerance);

/// The pair (V_t, A_t) iterated by the VA recursion.
struct VaPair {
  ValueTable v;
  AdvTable a;

  /// Q = V + A.
  QTable implied_q() const;
};

/// Fixed points adapted to the behavior policy mu:
///   V_mu(x) = sum_a mu(a|x) Q(x, a),   A_mu = Q - V_mu.
/// In control mode q_pi holds Q^* (the greedy policy is the target).
struct ExactTargets {
  QTable q_pi;
  QTable q_star;
  ValueTable v_mu_pi;
  AdvTable a_mu_pi;
  ValueTable v_mu_star;
  AdvTable a_mu_star;
  bool control = false;

  const QTable& target_q() const { return control ? q_star : q_pi; }
  const ValueTable& target_v_mu() const { return control ? v_mu_star : v_mu_pi; }
  const AdvTable& target_a_mu() const { return control ? a_mu_star : a_mu_pi; }
};

/// Requires mu with full coverage.
ExactTargets mu_targets(const TabularMdp& mdp, const PolicyTable& mu, const BackupMode& mode,
                        double tol = kSolverTolerance);

/// Q~ = (V + A) - mu A, broadcast over actions.
QTable transformed_q(const VaPair& pair, const PolicyTable& mu);

/// One exact step:  V' = mu T(Q - mu A),  A' = T(Q - mu A) - V.
VaPair va_recursion_step(const VaPair& pair, const TabularMdp& mdp, const PolicyTable& mu,
                         const BackupMode& mode);

/// One-hot argmax rows; ties go to the lowest action index.
PolicyTable greedy(const QTable& q);
/// Per-state greedy actions with the same tie rule.
std::vector<int> greedy_actions(const QTable& q);

/// V^pi(x) = sum_a pi(a|x) Q^pi(x, a).
ValueTable policy_value(const TabularMdp& mdp, const PolicyTable& pi, double tol = kSolverTolerance);

/// Mean over states of V^{greedy(q)}.
double policy_performance(const TabularMdp& mdp, const QTable& q, double tol = kSolverTolerance);

}  // namespace valab
