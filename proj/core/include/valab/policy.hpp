#pragma once

#include <optional>
#include <span>
#include <vector>

#include "valab/tables.hpp"

namespace valab {

/// Row-tolerance for probability tables.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Stochastic tabular policy; every row is a distribution over actions.
class PolicyTable {
 public:
  PolicyTable() = default;
  /// Throws ParameterError unless every row is a distribution within 1e-12.
  explicit PolicyTable(Matrix probs);

  static PolicyTable uniform(int num_states, int num_actions);
  /// One-hot rows on actions[x].
  static PolicyTable deterministic(std::span<const int> actions, int num_actions);

  int num_states() const { return static_cast<int>(probs_.rows()); }
  int num_actions() const { return static_cast<int>(probs_.cols()); }

  double operator()(int x, int a) const { return probs_(x, a); }
  const Matrix& matrix() const { return probs_; }

  /// Every entry strictly positive.
  bool full_coverage() const { return (probs_.array() > 0.0).all(); }
  bool is_deterministic() const;
  /// The action of a one-hot row, if the row is one-hot.
  std::optional<int> deterministic_action(int x) const;

  /// Per-state expectation sum_a pi(a|x) table(x, a).
  template <class Tag>
  Vector average(const StateActionTable<Tag>& table) const {
    check_shape(table.num_states(), table.num_actions());
    return probs_.cwiseProduct(table.matrix()).rowwise().sum();
  }
  template <class Tag>
  double average(const StateActionTable<Tag>& table, int x) const {
    return probs_.row(x).dot(table.matrix().row(x));
  }

  friend bool operator==(const PolicyTable& lhs, const PolicyTable& rhs) {
    return lhs.probs_.rows() == rhs.probs_.rows() && lhs.probs_.cols() == rhs.probs_.cols() &&
           lhs.probs_ == rhs.probs_;
  }

 private:
  void check_shape(int num_states, int num_actions) const;

  Matrix probs_;
};

}  // namespace valab
