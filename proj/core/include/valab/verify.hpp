#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace valab {

/// Outcome of one certification. `measured` is the worst observed quantity
/// (a discrepancy, or a bound violation margin when negative) and
/// `threshold` what it was compared against.
struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// ||T q1 - T q2||_inf <= gamma ||q1 - q2||_inf on random 20 x 5 MDPs for
/// random pairs and constant-shift pairs, both modes. With `discount` set,
/// the operators use that discount while the bound keeps the MDP's gamma.
CheckResult verify_contraction(std::uint64_t seed, std::optional<double> discount = std::nullopt);

/// Exact VA recursion from random (V0, A0) on `num_mdps` random 20 x 5 MDPs:
/// ||V_t - V_mu||_inf <= gamma^t C and ||A_t - A_mu||_inf <= gamma^(t-1) (1 + gamma) C
/// (+1e-9) for t <= horizon, C = ||V0 - V_mu||_inf + ||A0 - A_mu||_inf, both modes.
CheckResult verify_recursion_rates(std::uint64_t seed, int num_mdps = 20, int horizon = 500);

/// Q~_t = Q_t - mu A_t equals t applications of the Bellman operator to
/// Q~_0 within 1e-10, t <= steps, both modes.
CheckResult verify_transformed_identity(std::uint64_t seed, int steps = 200);

/// The tabular VA update with step 1, averaged exactly over a ~ mu and
/// x' ~ P, equals one step of the VA recursion within 1e-12, for every
/// size up to 4 states and 3 actions, `draws` MDPs each, both modes.
CheckResult verify_expected_update(std::uint64_t seed, int draws = 50);

/// value_gradient_gap over `draws` random parameter sets on 3-state MDPs.
CheckResult verify_gradient_equivalence(std::uint64_t seed, int draws = 100);

/// objective(nu = mu) <= objective(nu) + 1e-12 for `nu_draws` random nu per
/// state over `draws` random (f, mu), and objective(mu) equals the
/// mu-variance of f(x, .) within 1e-12.
CheckResult verify_behavior_minimizer(std::uint64_t seed, int draws = 20, int nu_draws = 50);

/// Synchronous sampled VA-learning, alpha_t = 1 / (t + 10)^0.7, gamma 0.9,
/// on `num_mdps` random 5 x 3 MDPs with `runs_per_mdp` seeded runs each and
/// both modes: a run passes when ||V - V_mu||_inf < 0.05 and
/// ||A - A_mu||_inf < 0.05 after `steps` steps. Certifies when at least
/// 90% of the runs of each mode pass.
CheckResult verify_synchronous_sa(std::uint64_t seed, int num_mdps = 5, int runs_per_mdp = 2, int steps = 100000);

enum class VerifyLevel { fast, full };

/// fast: every check once from seed. full: every check for 10 consecutive
/// seeds starting at seed. Both include the gamma = 1.01 negative control,
/// which passes when the contraction check rejects the corrupted operator.
std::vector<CheckResult> run_verification(VerifyLevel level, std::uint64_t seed = 0);

/// One "PASS|FAIL name measured=... threshold=... detail" line per result.
std::string format_results(const std::vector<CheckResult>& results);

}  // namespace valab
