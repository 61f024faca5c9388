#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "valab/analysis.hpp"
#include "valab/config.hpp"
#include "valab/dp.hpp"
#include "valab/io.hpp"
#include "valab/mdp.hpp"
#include "valab/sampler.hpp"

namespace valab {

/// One seed's MDP, policies and data. Sub-streams of the seed: 1 draws the
/// MDP and then pi_det, 2 the trajectories, 3 the shuffled order.
struct Instance {
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  TabularMdp mdp;
  PolicyTable pi_det;
  PolicyTable behavior;
  /// Evaluation target; in control mode the greedy policy of Q^* instead.
  PolicyTable target;
  BackupMode mode;
  std::vector<Trajectory> trajectories;
  PolicyTable mu_hat;
};

Instance make_instance(const ExperimentConfig& config, std::uint64_t seed, double epsilon);

/// MDP plus the policies "pi_det", "behavior" and "target".
Bundle instance_bundle(const Instance& instance);

/// "eps<epsilon>_seed<seed>" with the shortest round-trip epsilon.
std::string run_id_for(double epsilon, std::uint64_t seed);

/// Trains every configured algorithm on one instance and returns its
/// metric records ordered by (algorithm, iteration, metric).
std::vector<MetricRecord> run_instance(const ExperimentConfig& config, const Instance& instance);

/// Final-iteration statistics of one (algorithm, epsilon, metric).
struct SummaryRow {
  std::string algorithm;
  double epsilon = 0.0;
  std::string metric;
  double mean = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single run.
  double std = 0.0;
  int n = 0;
  /// Runs whose logged values over the last 10% of iterations stay within
  /// a relative change of 1e-6 of the final value.
  int n_plateaued = 0;
};

inline constexpr double kPlateauTolerance = 1e-6;

/// True when every value logged at iteration >= 0.9 * iterations is within
/// kPlateauTolerance relative distance of the final value.
bool plateaued(std::span<const MetricRecord> series, std::int64_t iterations);

/// Summary over the records of one epsilon, in configured algorithm and
/// metric order.
std::vector<SummaryRow> summarize(const ExperimentConfig& config, double epsilon,
                                  std::span<const MetricRecord> records);

std::string summary_csv(std::span<const SummaryRow> rows, bool with_epsilon);

/// Worker count: hardware concurrency capped by VALAB_THREADS when set.
int worker_count();

struct RunOutput {
  /// Ordered by (seed, algorithm, iteration, metric).
  std::vector<MetricRecord> records;
  std::vector<SummaryRow> summary;
};

/// Every seed at the config's epsilon, computed in parallel.
RunOutput run_experiment(const ExperimentConfig& config);

struct SweepOutput {
  /// Final-iteration records, ordered by (epsilon, seed, algorithm, metric).
  std::vector<MetricRecord> final_records;
  std::vector<SummaryRow> summary;
};

/// Every (epsilon in the grid, seed) pair. Requires a nonempty grid.
SweepOutput sweep_experiment(const ExperimentConfig& config);

/// Writers. Each creates config.out and returns the files it wrote.
///   run:      <metric>.csv per metric, summary.csv, manifest.json
///   sweep:    sweep_runs.csv, sweep_summary.csv, manifest.json
///   generate: instance_seed<k>.json and trajectories_seed<k>.csv per seed
std::vector<std::filesystem::path> write_run(const ExperimentConfig& config, const RunOutput& output);
std::vector<std::filesystem::path> write_sweep(const ExperimentConfig& config, const SweepOutput& output);
std::vector<std::filesystem::path> write_generate(const ExperimentConfig& config);

/// The two-state walkthrough: one (y, a) update of tabular Q-learning and
/// of VA-learning from zero tables under uniform mu, printed as tables.
std::string demo_report();

}  // namespace valab
