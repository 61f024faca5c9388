#include "valab/policy.hpp"

#include <cmath>
#include <string>

namespace valab {

PolicyTable::PolicyTable(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) throw ParameterError("PolicyTable: empty table");
  for (Eigen::Index x = 0; x < probs_.rows(); ++x) {
    double sum = 0.0;
    for (Eigen::Index a = 0; a < probs_.cols(); ++a) {
      const double p = probs_(x, a);
      if (!std::isfinite(p) || p < 0.0)
        throw ParameterError("PolicyTable: negative or non-finite entry in row " + std::to_string(x));
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance)
      throw ParameterError("PolicyTable: row " + std::to_string(x) + " does not sum to 1");
  }
}

PolicyTable PolicyTable::uniform(int num_states, int num_actions) {
  if (num_states < 1 || num_actions < 1) throw ParameterError("PolicyTable::uniform: bad dimensions");
  return PolicyTable(Matrix::Constant(num_states, num_actions, 1.0 / num_actions));
}

PolicyTable PolicyTable::deterministic(std::span<const int> actions, int num_actions) {
  if (actions.empty() || num_actions < 1)
    throw ParameterError("PolicyTable::deterministic: bad dimensions");
  Matrix probs = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), num_actions);
  for (std::size_t x = 0; x < actions.size(); ++x) {
    if (actions[x] < 0 || actions[x] >= num_actions)
      throw ParameterError("PolicyTable::deterministic: action out of range");
    probs(static_cast<Eigen::Index>(x), actions[x]) = 1.0;
  }
  return PolicyTable(std::move(probs));
}

bool PolicyTable::is_deterministic() const {
  for (int x = 0; x < num_states(); ++x)
    if (!deterministic_action(x)) return false;
  return true;
}

std::optional<int> PolicyTable::deterministic_action(int x) const {
  std::optional<int> found;
  for (int a = 0; a < num_actions(); ++a) {
    const double p = probs_(x, a);
    if (p == 0.0) continue;
    if (p != 1.0 || found) return std::nullopt;
    found = a;
  }
  return found;
}

void PolicyTable::check_shape(int num_states, int num_actions) const {
  if (num_states != this->num_states() || num_actions != this->num_actions())
    throw ParameterError("PolicyTable: table shape does not match policy");
}

}  // namespace valab
