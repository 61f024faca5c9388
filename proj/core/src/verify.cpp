#include "valab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "valab/analysis.hpp"
#include "valab/dp.hpp"
#include "valab/learners.hpp"
#include "valab/mdp.hpp"

namespace valab {

namespace {

// Dirichlet(1) rows; every entry strictly positive.
PolicyTable random_policy(int num_states, int num_actions, Rng& rng) {
  Matrix probs(num_states, num_actions);
  for (int x = 0; x < num_states; ++x) {
    double total = 0.0;
    for (int a = 0; a < num_actions; ++a) {
      double g = 0.0;
      while (!(g > 0.0)) g = rng.gamma(1.0);
      probs(x, a) = g;
      total += g;
    }
    probs.row(x) /= total;
  }
  return PolicyTable(std::move(probs));
}

Matrix random_matrix(int rows, int cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

VaPair random_pair(int num_states, int num_actions, double scale, Rng& rng) {
  return {ValueTable(Vector(random_matrix(num_states, 1, scale, rng).col(0))),
          AdvTable(random_matrix(num_states, num_actions, scale, rng))};
}

// Evaluation of a random stochastic target, then control.
std::vector<BackupMode> both_modes(int num_states, int num_actions, Rng& rng) {
  return {BackupMode::evaluation(random_policy(num_states, num_actions, rng)), BackupMode::control()};
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buffer[160];
  std::snprintf(buffer, sizeof buffer, pattern, a, b);
  return buffer;
}

}  // namespace

CheckResult verify_contraction(std::uint64_t seed, std::optional<double> discount) {
  CheckResult result{"contraction", true, 0.0, 0.0, ""};
  for (int m = 0; m < 4; ++m) {
    Rng rng(derive_seed(seed, 100 + static_cast<std::uint64_t>(m)));
    const TabularMdp mdp = generate_random_mdp(20, 5, 0.99, 0.5, RewardSpec{}, rng);
    result.threshold = mdp.gamma();
    for (const auto& mode : both_modes(20, 5, rng)) {
      auto apply = [&](const QTable& q) {
        return discount ? detail::bellman_with_discount(q, mode, mdp, *discount) : bellman(q, mode, mdp);
      };
      for (int i = 0; i < 20; ++i) {
        const QTable q1(random_matrix(20, 5, 10.0, rng));
        const QTable q2 = i % 2 == 0 ? QTable(random_matrix(20, 5, 10.0, rng))
                                     : QTable(Matrix(q1.matrix().array() + 5.0 * rng.normal()));
        const double gap = sup_norm_distance(q1, q2);
        if (gap == 0.0) continue;
        const double ratio = sup_norm_distance(apply(q1), apply(q2)) / gap;
        result.measured = std::max(result.measured, ratio);
        if (ratio > mdp.gamma() + 1e-12) result.passed = false;
      }
    }
  }
  result.detail = "worst ||Tq1 - Tq2|| / ||q1 - q2|| against gamma";
  return result;
}

CheckResult verify_recursion_rates(std::uint64_t seed, int num_mdps, int horizon) {
  CheckResult result{"recursion_rates", true, std::numeric_limits<double>::infinity(), 0.0, ""};
  for (int m = 0; m < num_mdps; ++m) {
    Rng rng(derive_seed(seed, 200 + static_cast<std::uint64_t>(m)));
    const TabularMdp mdp = generate_random_mdp(20, 5, 0.99, 0.5, RewardSpec{}, rng);
    const PolicyTable mu = random_policy(20, 5, rng);
    const double gamma = mdp.gamma();
    for (const auto& mode : both_modes(20, 5, rng)) {
      const ExactTargets targets = mu_targets(mdp, mu, mode);
      VaPair pair = random_pair(20, 5, 10.0, rng);
      const double c = sup_norm_distance(pair.v, targets.target_v_mu()) + sup_norm_distance(pair.a, targets.target_a_mu());
      std::vector<double> v_err;
      std::vector<double> a_err;
      for (int t = 0; t <= horizon; ++t) {
        v_err.push_back(sup_norm_distance(pair.v, targets.target_v_mu()));
        a_err.push_back(sup_norm_distance(pair.a, targets.target_a_mu()));
        pair = va_recursion_step(pair, mdp, mu, mode);
      }
      // gamma^(t-1) (1 + gamma) C = gamma^t ((1 + gamma) C / gamma).
      const auto v_cert = rate_certificate(v_err, gamma, c);
      const auto a_cert = rate_certificate(a_err, gamma, (1.0 + gamma) * c / gamma);
      result.passed = result.passed && v_cert.certified && a_cert.certified;
      result.measured = std::min({result.measured, v_cert.margin, a_cert.margin});
    }
  }
  result.detail = fmt("min bound - error over %g MDPs x 2 modes, t <= %g", num_mdps, horizon);
  return result;
}

CheckResult verify_transformed_identity(std::uint64_t seed, int steps) {
  CheckResult result{"transformed_q_identity", true, 0.0, 1e-10, ""};
  for (int m = 0; m < 3; ++m) {
    Rng rng(derive_seed(seed, 300 + static_cast<std::uint64_t>(m)));
    const TabularMdp mdp = generate_random_mdp(20, 5, 0.99, 0.5, RewardSpec{}, rng);
    const PolicyTable mu = random_policy(20, 5, rng);
    for (const auto& mode : both_modes(20, 5, rng)) {
      VaPair pair = random_pair(20, 5, 10.0, rng);
      QTable plain = transformed_q(pair, mu);
      for (int t = 1; t <= steps; ++t) {
        pair = va_recursion_step(pair, mdp, mu, mode);
        plain = bellman(plain, mode, mdp);
        result.measured = std::max(result.measured, sup_norm_distance(transformed_q(pair, mu), plain));
      }
    }
  }
  result.passed = result.measured <= result.threshold;
  result.detail = fmt("max ||Q~_t - T^t Q~_0||_inf, t <= %g", steps);
  return result;
}

CheckResult verify_expected_update(std::uint64_t seed, int draws) {
  CheckResult result{"expected_update_reduction", true, 0.0, 1e-12, ""};
  std::uint64_t stream = 0;
  for (int s = 2; s <= 4; ++s) {
    for (int a_count = 1; a_count <= 3; ++a_count) {
      for (int d = 0; d < draws; ++d) {
        Rng rng(derive_seed(seed, 10000 + stream++));
        const TabularMdp mdp = generate_random_mdp(s, a_count, 0.99, 0.5, RewardSpec{}, rng);
        const PolicyTable mu = random_policy(s, a_count, rng);
        for (const auto& mode : both_modes(s, a_count, rng)) {
          const VaPair pair = random_pair(s, a_count, 1.0, rng);
          const VaPair exact = va_recursion_step(pair, mdp, mu, mode);

          VaLearnerState state = VaLearnerState::zeros(s, a_count);
          state.v = pair.v;
          state.adv = pair.a;
          state.sync_targets();
          LearnSpec spec;
          spec.mode = mode;
          spec.gamma = mdp.gamma();
          spec.schedule = LrSchedule::constant(1.0);
          spec.update_style = UpdateStyle::incremental;

          for (int x = 0; x < s; ++x) {
            double v_mean = 0.0;
            for (int a = 0; a < a_count; ++a) {
              double a_mean = 0.0;
              for (int y = 0; y < s; ++y) {
                const double p = mdp.transition(x, a, y);
                if (p == 0.0) continue;
                VaLearnerState copy = state;
                va_update(copy, Transition{x, a, mdp.reward(x, a), y}, mu, spec);
                v_mean += mu(x, a) * p * copy.v(x);
                a_mean += p * copy.adv(x, a);
              }
              result.measured = std::max(result.measured, std::abs(a_mean - exact.a(x, a)));
            }
            result.measured = std::max(result.measured, std::abs(v_mean - exact.v(x)));
          }
        }
      }
    }
  }
  result.passed = result.measured <= result.threshold;
  result.detail = fmt("max |E[update] - recursion| over sizes <= 4 x 3, %g draws each", draws);
  return result;
}

CheckResult verify_gradient_equivalence(std::uint64_t seed, int draws) {
  CheckResult result{"dueling_gradient_equivalence", true, 0.0, 1e-10, ""};
  for (int d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, 20000 + static_cast<std::uint64_t>(d)));
    const int num_actions = 2 + static_cast<int>(rng.uniform_index(3));
    const TabularMdp mdp = generate_random_mdp(3, num_actions, 0.99, 0.5, RewardSpec{}, rng);
    const PolicyTable mu = random_policy(3, num_actions, rng);
    const VaPair pair = random_pair(3, num_actions, 5.0, rng);
    VaLearnerState params = VaLearnerState::zeros(3, num_actions);
    params.v = pair.v;
    params.adv = pair.a;
    params.sync_targets();
    for (const auto& mode : both_modes(3, num_actions, rng))
      for (int x = 0; x < 3; ++x) result.measured = std::max(result.measured, value_gradient_gap(mdp, params, mu, mode, x));
  }
  result.passed = result.measured <= result.threshold;
  result.detail = fmt("max value-gradient discrepancy over %g draws", draws);
  return result;
}

CheckResult verify_behavior_minimizer(std::uint64_t seed, int draws, int nu_draws) {
  CheckResult result{"behavior_minimizes_adv_norm", true, std::numeric_limits<double>::infinity(), -1e-12, ""};
  double variance_gap = 0.0;
  for (int d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, 30000 + static_cast<std::uint64_t>(d)));
    const int num_states = 5;
    const int num_actions = 2 + static_cast<int>(rng.uniform_index(4));
    const QTable f(random_matrix(num_states, num_actions, 3.0, rng));
    const PolicyTable mu = random_policy(num_states, num_actions, rng);
    for (int x = 0; x < num_states; ++x) {
      const double at_mu = advantage_norm_objective(f, mu, mu, x);
      const double mean = mu.average(f, x);
      double variance = 0.0;
      for (int a = 0; a < num_actions; ++a) variance += mu(x, a) * (f(x, a) - mean) * (f(x, a) - mean);
      variance_gap = std::max(variance_gap, std::abs(at_mu - variance));
      for (int k = 0; k < nu_draws; ++k) {
        const PolicyTable nu = k == 0 ? PolicyTable::uniform(num_states, num_actions)
                                      : random_policy(num_states, num_actions, rng);
        result.measured = std::min(result.measured, advantage_norm_objective(f, nu, mu, x) - at_mu);
      }
    }
  }
  result.passed = result.measured >= result.threshold && variance_gap <= 1e-12;
  result.detail = fmt("min objective(nu) - objective(mu); variance identity gap %.3g", variance_gap);
  return result;
}

CheckResult verify_synchronous_sa(std::uint64_t seed, int num_mdps, int runs_per_mdp, int steps) {
  CheckResult result{"synchronous_sa_convergence", true, 1.0, 0.9, ""};
  constexpr double kGamma = 0.9;
  constexpr double kTolerance = 0.05;
  int passed[2] = {0, 0};
  int total = 0;
  double worst = 0.0;
  for (int m = 0; m < num_mdps; ++m) {
    Rng rng(derive_seed(seed, 40000 + static_cast<std::uint64_t>(m)));
    const TabularMdp mdp = generate_random_mdp(5, 3, kGamma, 0.5, RewardSpec{}, rng);
    const PolicyTable mu = PolicyTable::uniform(5, 3);
    const PolicyTable pi = mixed_policy(0.5, random_deterministic_policy(5, 3, rng));
    const BackupMode modes[2] = {BackupMode::evaluation(pi), BackupMode::control()};
    for (int mi = 0; mi < 2; ++mi) {
      const ExactTargets targets = mu_targets(mdp, mu, modes[mi]);
      LearnSpec spec;
      spec.mode = modes[mi];
      spec.gamma = kGamma;
      spec.update_style = UpdateStyle::synchronous_sa;
      spec.schedule = LrSchedule::robbins_monro(1.0, 10.0, 0.7);
      for (int r = 0; r < runs_per_mdp; ++r) {
        Rng run_rng(derive_seed(seed, 50000 + static_cast<std::uint64_t>((m * runs_per_mdp + r) * 2 + mi)));
        VaLearnerState state = VaLearnerState::zeros(5, 3);
        for (int t = 0; t < steps; ++t) synchronous_sa_step(state, mdp, mu, spec, run_rng);
        const double err = std::max(sup_norm_distance(state.v, targets.target_v_mu()),
                                    sup_norm_distance(state.adv, targets.target_a_mu()));
        worst = std::max(worst, err);
        if (err < kTolerance) ++passed[mi];
      }
    }
    total += runs_per_mdp;
  }
  for (int count : passed) result.measured = std::min(result.measured, static_cast<double>(count) / total);
  result.passed = result.measured >= result.threshold;
  result.detail = fmt("fraction of runs within 0.05 (worst mode); worst error %.4g over %g runs per mode", worst,
                      total);
  return result;
}

std::vector<CheckResult> run_verification(VerifyLevel level, std::uint64_t seed) {
  const int rounds = level == VerifyLevel::full ? 10 : 1;
  std::vector<CheckResult> results;
  for (int i = 0; i < rounds; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    std::vector<CheckResult> round;
    round.push_back(verify_contraction(s));
    CheckResult negative = verify_contraction(s, 1.01);
    negative.name = "contraction_negative_control";
    negative.passed = !negative.passed;
    negative.detail = "operator with discount 1.01 must be rejected";
    round.push_back(negative);
    round.push_back(verify_recursion_rates(s));
    round.push_back(verify_transformed_identity(s));
    round.push_back(verify_expected_update(s));
    round.push_back(verify_gradient_equivalence(s));
    round.push_back(verify_behavior_minimizer(s));
    round.push_back(verify_synchronous_sa(s));
    for (auto& r : round) {
      if (rounds > 1) r.name += "[seed " + std::to_string(s) + "]";
      results.push_back(std::move(r));
    }
  }
  return results;
}

std::string format_results(const std::vector<CheckResult>& results) {
  std::string out;
  for (const auto& r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%s %-36s measured=%-12.6g threshold=%-10.3g %s\n", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.measured, r.threshold, r.detail.c_str());
    out += line;
  }
  return out;
}

}  // namespace valab
