#pragma once

#include <Eigen/Dense>
#include <utility>

#include "valab/errors.hpp"

namespace valab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Dense table indexed by (state, action). The tag keeps Q-functions,
/// advantages and unconstrained dueling functions from mixing silently.
template <class Tag>
class StateActionTable {
 public:
  StateActionTable() = default;
  StateActionTable(int num_states, int num_actions)
      : values_(Matrix::Zero(num_states, num_actions)) {}
  explicit StateActionTable(Matrix values) : values_(std::move(values)) {}

  int num_states() const { return static_cast<int>(values_.rows()); }
  int num_actions() const { return static_cast<int>(values_.cols()); }

  double operator()(int x, int a) const { return values_(x, a); }
  double& operator()(int x, int a) { return values_(x, a); }

  const Matrix& matrix() const { return values_; }
  Matrix& matrix() { return values_; }

  bool all_finite() const { return values_.allFinite(); }

  friend bool operator==(const StateActionTable& lhs, const StateActionTable& rhs) {
    return lhs.values_.rows() == rhs.values_.rows() && lhs.values_.cols() == rhs.values_.cols() &&
           lhs.values_ == rhs.values_;
  }

 private:
  Matrix values_;
};

struct QTag {};
struct AdvTag {};

/// Q-functions and unconstrained dueling functions f(x, a).
using QTable = StateActionTable<QTag>;
/// Advantage functions.
using AdvTable = StateActionTable<AdvTag>;

/// State-indexed value function.
class ValueTable {
 public:
  ValueTable() = default;
  explicit ValueTable(int num_states) : values_(Vector::Zero(num_states)) {}
  explicit ValueTable(Vector values) : values_(std::move(values)) {}

  int num_states() const { return static_cast<int>(values_.size()); }

  double operator()(int x) const { return values_(x); }
  double& operator()(int x) { return values_(x); }

  const Vector& vector() const { return values_; }
  Vector& vector() { return values_; }

  bool all_finite() const { return values_.allFinite(); }

  friend bool operator==(const ValueTable& lhs, const ValueTable& rhs) {
    return lhs.values_.size() == rhs.values_.size() && lhs.values_ == rhs.values_;
  }

 private:
  Vector values_;
};

template <class Tag>
double sup_norm_distance(const StateActionTable<Tag>& lhs, const StateActionTable<Tag>& rhs) {
  if (lhs.num_states() != rhs.num_states() || lhs.num_actions() != rhs.num_actions())
    throw ParameterError("sup_norm_distance: shape mismatch");
  return (lhs.matrix() - rhs.matrix()).cwiseAbs().maxCoeff();
}

inline double sup_norm_distance(const ValueTable& lhs, const ValueTable& rhs) {
  if (lhs.num_states() != rhs.num_states())
    throw ParameterError("sup_norm_distance: shape mismatch");
  return (lhs.vector() - rhs.vector()).cwiseAbs().maxCoeff();
}

}  // namespace valab
