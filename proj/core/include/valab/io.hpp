#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "valab/learners.hpp"
#include "valab/mdp.hpp"
#include "valab/policy.hpp"
#include "valab/tables.hpp"

namespace valab {

/// Whole-file helpers; failures throw IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// {num_states, num_actions, gamma, reward_noise_std, generator_seed?,
///  transition[x][a][x'], reward_mean[x][a]}. Numbers round-trip exactly.
std::string mdp_to_json(const TabularMdp& mdp);
/// Malformed documents throw IoError; invalid MDPs throw ParameterError.
TabularMdp mdp_from_json(std::string_view text);

/// Row-major nested array of probabilities.
std::string policy_to_json(const PolicyTable& pi);
PolicyTable policy_from_json(std::string_view text);

std::string table_to_json(const QTable& q);
QTable table_from_json(std::string_view text);

/// Learner snapshots: online and target tables plus step_count, using the
/// nested-array table layout.
std::string snapshot_to_json(const QLearnerState& state);
QLearnerState q_snapshot_from_json(std::string_view text);
std::string snapshot_to_json(const VaLearnerState& state);
VaLearnerState va_snapshot_from_json(std::string_view text);

/// An MDP with named policies, as written by `valab generate`.
struct Bundle {
  TabularMdp mdp;
  std::vector<std::pair<std::string, PolicyTable>> policies;

  /// Throws ParameterError when no policy has that name.
  const PolicyTable& policy(std::string_view name) const;
};

std::string bundle_to_json(const Bundle& bundle);
Bundle bundle_from_json(std::string_view text);
void save_bundle(const std::filesystem::path& path, const Bundle& bundle);
Bundle load_bundle(const std::filesystem::path& path);

}  // namespace valab
