#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "valab/learners.hpp"
#include "valab/sampler.hpp"

namespace valab {

/// Library version, e.g. "0.1.0".
std::string_view version();

enum class ExperimentMode { evaluation, control };

enum class Algorithm { q_learning, td_learning, va_learning, dueling_uniform, dueling_behavior };

std::string_view algorithm_name(Algorithm algorithm);
/// Throws ConfigError for unknown names.
Algorithm parse_algorithm(std::string_view name);
std::string_view mode_name(ExperimentMode mode);
/// Accepts "evaluation", "eval" and "control".
ExperimentMode parse_mode(std::string_view name);

/// Everything a run or sweep needs. Defaults reproduce the tabular protocol:
/// 20 x 5 Dirichlet(0.5) MDPs, gamma 0.99, 20 trajectories from state 0 of
/// length int(2 / (1 - gamma)), constant step 0.1, target copy every 10
/// updates, 2000 full-batch gradient steps, seeds 0..19.
struct ExperimentConfig {
  int num_states = 20;
  int num_actions = 5;
  double gamma = 0.99;
  double dirichlet_alpha = 0.5;
  double reward_noise_std = 0.0;

  ExperimentMode mode = ExperimentMode::control;
  /// Behavior mu = epsilon * uniform + (1 - epsilon) * pi_det. Unset means
  /// 0.8 in control mode and 1.0 (uniform) in evaluation mode.
  std::optional<double> epsilon;
  /// Grid for `sweep`.
  std::vector<double> epsilon_grid;
  /// Evaluation target pi = target_epsilon * uniform + (1 - target_epsilon) * pi_det.
  double target_epsilon = 0.5;

  /// Empty means every algorithm valid for the mode.
  std::vector<Algorithm> algorithms;

  LrSchedule schedule = LrSchedule::constant(0.1);
  int target_period = 10;
  int n_step = 1;
  Loss loss = Loss::square();
  UpdateStyle update_style = UpdateStyle::batch_gradient;
  bool online_value_baseline = false;
  StreamOrder stream_order = StreamOrder::sequential;
  /// Additive smoothing of the behavior estimate mu_hat.
  double behavior_smoothing = 0.0;

  int n_traj = 20;
  /// Unset means default_horizon(gamma).
  std::optional<int> horizon;
  int start_state = 0;

  int iterations = 2000;
  /// Metrics are logged at iteration 0, every log_every iterations and at
  /// the final iteration.
  int log_every = 1;
  std::vector<std::uint64_t> seeds;
  /// Empty means every registered metric that applies.
  std::vector<std::string> metrics;
  std::string out = "out";

  ExperimentConfig();

  double effective_epsilon() const;
  int effective_horizon() const;
  std::vector<Algorithm> effective_algorithms() const;
  std::vector<std::string> effective_metrics() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Unknown keys and wrongly typed values throw ConfigError.
ExperimentConfig config_from_json(std::string_view text);
/// Canonical form: every field, fixed key order.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical JSON, ignoring the output directory.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace valab
