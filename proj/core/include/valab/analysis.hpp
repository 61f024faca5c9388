#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "valab/dp.hpp"
#include "valab/learners.hpp"
#include "valab/tables.hpp"

namespace valab {

/// ||a_hat - a_ref||_2 over all (x, a) entries.
double adv_error(const AdvTable& a_hat, const AdvTable& a_ref);
/// ||q_hat - q_ref||_2 over all (x, a) entries.
double q_error(const QTable& q_hat, const QTable& q_ref);

/// Q - pi Q: the advantage estimate a Q-function implies for policy pi.
AdvTable advantage_of(const QTable& q, const PolicyTable& pi);

/// Sup-norm gap between the mu-expected value gradients of the VA loss and
/// of the Q-learning loss under behavior dueling (nu = mu), both taken at
/// state x by exact enumeration over a ~ mu(.|x) and x' ~ P(.|x, a).
/// `params` supplies V and the unconstrained table f (read as A by VA and
/// as f by the dueling head); its targets must equal its online tables.
double value_gradient_gap(const TabularMdp& mdp, const VaLearnerState& params, const PolicyTable& mu,
                    const BackupMode& mode, int x);

/// sum_a mu(a|x) (f(x, a) - f(x, nu))^2.
double advantage_norm_objective(const QTable& f, const PolicyTable& nu, const PolicyTable& mu, int x);

/// Mean over the samples of (f(x_i, a_i) - f(x_i, weights))^2.
double sample_advantage_norm(const QTable& f, const PolicyTable& weights, std::span<const Transition> samples);

struct RateCertificate {
  bool certified = false;
  double fitted_constant = 0.0;
  /// min_t (bound_t - error_t); negative when a point violates the bound.
  double margin = 0.0;
};

/// Checks error_t <= C gamma^t + 1e-9 for every t. With `constant` given,
/// C is that constant; otherwise C = max_t error_t / gamma^t (fitted).
RateCertificate rate_certificate(std::span<const double> series, double gamma,
                                 std::optional<double> constant = std::nullopt);

// --- Metric records ---------------------------------------------------------

struct MetricRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::int64_t iteration = 0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

namespace metric {
inline constexpr std::string_view kPerformance = "performance";
inline constexpr std::string_view kAdvError = "adv_error";
inline constexpr std::string_view kQError = "q_error";
/// (f(x,a) - f(x,nu))^2 averaged over training samples, nu = the learner's weights.
inline constexpr std::string_view kAdvNormNu = "adv_norm_nu";
/// (f(x,a) - f(x,mu_hat))^2 averaged over training samples.
inline constexpr std::string_view kAdvNormMu = "adv_norm_mu";
}  // namespace metric

/// Every metric name the tools may emit.
std::span<const std::string_view> metric_registry();
bool is_registered_metric(std::string_view name);

inline constexpr std::string_view kMetricCsvHeader = "run_id,seed,algorithm,iteration,metric,value";

/// Throws ParameterError for names outside the registry.
std::string to_csv(std::span<const MetricRecord> records);
void write_metric_csv(const std::filesystem::path& path, std::span<const MetricRecord> records);
std::vector<MetricRecord> read_metric_csv(const std::filesystem::path& path);

}  // namespace valab
