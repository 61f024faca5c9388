#include "valab/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "valab/errors.hpp"
#include "valab/format.hpp"
#include "valab/learners.hpp"

namespace valab {

namespace {

LearnSpec learn_spec(const ExperimentConfig& config, const BackupMode& mode) {
  LearnSpec spec;
  spec.mode = mode;
  spec.gamma = config.gamma;
  spec.schedule = config.schedule;
  spec.target_period = config.target_period;
  spec.n_step = config.n_step;
  spec.loss = config.loss;
  spec.online_value_baseline = config.online_value_baseline;
  spec.update_style = config.update_style;
  spec.validate();
  return spec;
}

// Shared references for one instance.
struct Reference {
  QTable q;
  AdvTable adv;
};

Reference reference_for(const Instance& instance) {
  const QTable q = instance.mode.is_control() ? solve_q_star(instance.mdp) : solve_q_pi(instance.mdp, instance.target);
  return {q, advantage_of(q, instance.target)};
}

// Policy performance keyed by greedy action vector; greedy policies change
// rarely during training, so most lookups hit.
class PerformanceCache {
 public:
  explicit PerformanceCache(const TabularMdp& mdp) : mdp_(mdp) {}

  double operator()(const QTable& q) {
    auto actions = greedy_actions(q);
    auto it = cache_.find(actions);
    if (it != cache_.end()) return it->second;
    const double value = policy_performance(mdp_, q);
    cache_.emplace(std::move(actions), value);
    return value;
  }

 private:
  const TabularMdp& mdp_;
  std::map<std::vector<int>, double> cache_;
};

// Uniform view over the learner states the experiment trains.
struct Learner {
  Algorithm algorithm;
  std::optional<QLearnerState> q;
  std::optional<VaLearnerState> va;
  std::optional<DuelingLearnerState> dueling;

  QTable implied_q() const {
    if (q) return q->q;
    if (va) return va->implied_q();
    return dueling->implied_q();
  }

  void step(std::span<const Segment> batch, const PolicyTable& mu_hat, const LearnSpec& spec) {
    if (q) grad_step_qlearning(*q, batch, spec);
    else if (va) grad_step_va(*va, batch, mu_hat, spec);
    else grad_step_qlearning(*dueling, batch, spec);
  }
};

Learner make_learner(Algorithm algorithm, const Instance& instance) {
  const int s = instance.mdp.num_states();
  const int a = instance.mdp.num_actions();
  Learner learner{algorithm, {}, {}, {}};
  switch (algorithm) {
    case Algorithm::q_learning:
    case Algorithm::td_learning: learner.q = QLearnerState::zeros(s, a); break;
    case Algorithm::va_learning: learner.va = VaLearnerState::zeros(s, a); break;
    case Algorithm::dueling_uniform: learner.dueling = DuelingLearnerState::zeros(PolicyTable::uniform(s, a)); break;
    case Algorithm::dueling_behavior: learner.dueling = DuelingLearnerState::zeros(instance.mu_hat); break;
  }
  return learner;
}

double metric_value(std::string_view name, const Learner& learner, const Instance& instance,
                    const Reference& reference, std::span<const Transition> samples, PerformanceCache& perf) {
  if (name == metric::kPerformance) return perf(learner.implied_q());
  if (name == metric::kQError) return q_error(learner.implied_q(), reference.q);
  if (name == metric::kAdvError) {
    if (learner.va) return adv_error(learner.va->adv, reference.adv);
    const QTable q = learner.implied_q();
    const PolicyTable pi = instance.mode.is_control() ? greedy(q) : instance.target;
    return adv_error(advantage_of(q, pi), reference.adv);
  }
  if (name == metric::kAdvNormNu) return sample_advantage_norm(learner.dueling->f, learner.dueling->nu, samples);
  if (name == metric::kAdvNormMu) return sample_advantage_norm(learner.dueling->f, instance.mu_hat, samples);
  throw InternalError("unhandled metric " + std::string(name));
}

bool applies(std::string_view name, const Learner& learner) {
  if (name == metric::kAdvNormNu || name == metric::kAdvNormMu) return learner.dueling.has_value();
  return true;
}

template <class Job>
void parallel_for(std::size_t count, Job job) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::mutex mutex;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        std::size_t index;
        {
          std::lock_guard lock(mutex);
          if (failure || next == count) return;
          index = next++;
        }
        try {
          job(index);
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string manifest_json(const ExperimentConfig& config, const std::string& command,
                          const std::vector<std::filesystem::path>& artifacts) {
  std::ostringstream out;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  out << "{\n  \"tool_version\": \"" << version() << "\",\n";
  out << "  \"command\": \"" << command << "\",\n";
  out << "  \"config_hash\": \"" << hash << "\",\n";
  out << "  \"seeds\": [";
  for (std::size_t i = 0; i < config.seeds.size(); ++i) out << (i ? ", " : "") << config.seeds[i];
  out << "],\n  \"artifacts\": [";
  for (std::size_t i = 0; i < artifacts.size(); ++i)
    out << (i ? ", " : "") << "\"" << artifacts[i].filename().string() << "\"";
  out << "],\n  \"config\": ";
  std::string config_text = config_to_json(config);
  std::string indented;
  for (char ch : config_text) {
    indented += ch;
    if (ch == '\n') indented += "  ";
  }
  out << indented << "\n}\n";
  return out.str();
}

std::filesystem::path prepare_out(const ExperimentConfig& config) {
  const std::filesystem::path dir(config.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

}  // namespace

Instance make_instance(const ExperimentConfig& config, std::uint64_t seed, double epsilon) {
  config.validate();
  Rng model_rng(derive_seed(seed, 1));
  RewardSpec rewards;
  rewards.noise_std = config.reward_noise_std;
  TabularMdp mdp = generate_random_mdp(config.num_states, config.num_actions, config.gamma, config.dirichlet_alpha,
                                       rewards, model_rng);
  PolicyTable pi_det = random_deterministic_policy(config.num_states, config.num_actions, model_rng);
  PolicyTable behavior = mixed_policy(epsilon, pi_det);
  const bool control = config.mode == ExperimentMode::control;
  PolicyTable target = control ? greedy(solve_q_star(mdp)) : mixed_policy(config.target_epsilon, pi_det);
  BackupMode mode = control ? BackupMode::control() : BackupMode::evaluation(target);

  Rng data_rng(derive_seed(seed, 2));
  auto trajectories = collect_trajectories(mdp, behavior, config.n_traj, config.effective_horizon(),
                                           config.start_state, data_rng);
  BehaviorEstimate estimate(config.num_states, config.num_actions, config.behavior_smoothing);
  for (const auto& trajectory : trajectories) estimate.observe(trajectory.transitions);

  return Instance{seed,
                  epsilon,
                  std::move(mdp),
                  std::move(pi_det),
                  std::move(behavior),
                  std::move(target),
                  std::move(mode),
                  std::move(trajectories),
                  estimate.estimated_policy()};
}

Bundle instance_bundle(const Instance& instance) {
  return Bundle{instance.mdp,
                {{"pi_det", instance.pi_det}, {"behavior", instance.behavior}, {"target", instance.target}}};
}

std::string run_id_for(double epsilon, std::uint64_t seed) {
  return "eps" + format_short(epsilon) + "_seed" + std::to_string(seed);
}

std::vector<MetricRecord> run_instance(const ExperimentConfig& config, const Instance& instance) {
  const LearnSpec spec = learn_spec(config, instance.mode);
  const Reference reference = reference_for(instance);
  const auto samples = flatten(instance.trajectories);
  const auto segments = make_segments(instance.trajectories, config.n_step);
  const auto metrics = config.effective_metrics();
  const std::string run_id = run_id_for(instance.epsilon, instance.seed);
  PerformanceCache perf(instance.mdp);

  std::vector<MetricRecord> records;
  for (Algorithm algorithm : config.effective_algorithms()) {
    Learner learner = make_learner(algorithm, instance);
    const std::string name(algorithm_name(algorithm));
    auto log = [&](std::int64_t iteration) {
      for (const auto& m : metrics) {
        if (!applies(m, learner)) continue;
        records.push_back({run_id, instance.seed, name, iteration, m,
                           metric_value(m, learner, instance, reference, samples, perf)});
      }
    };
    TransitionStream stream(instance.trajectories, config.stream_order, Rng(derive_seed(instance.seed, 3)));
    log(0);
    for (int k = 1; k <= config.iterations; ++k) {
      if (config.update_style == UpdateStyle::batch_gradient) {
        learner.step(segments, instance.mu_hat, spec);
      } else {
        // One epoch of single-sample steps in stream order.
        const Transition* base = stream.transitions().data();
        for (std::size_t i = 0; i < stream.epoch_size(); ++i) {
          const auto index = static_cast<std::size_t>(&stream.next() - base);
          learner.step(std::span<const Segment>(&segments[index], 1), instance.mu_hat, spec);
        }
      }
      if (k % config.log_every == 0 || k == config.iterations) log(k);
    }
  }
  return records;
}

bool plateaued(std::span<const MetricRecord> series, std::int64_t iterations) {
  if (series.empty()) return false;
  const double final_value = series.back().value;
  const double window_start = 0.9 * static_cast<double>(iterations);
  const double scale = std::max(std::abs(final_value), 1e-12);
  for (const auto& r : series)
    if (static_cast<double>(r.iteration) >= window_start && std::abs(r.value - final_value) > kPlateauTolerance * scale)
      return false;
  return true;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& config, double epsilon,
                                  std::span<const MetricRecord> records) {
  // (algorithm, metric) -> run_id -> series, preserving record order.
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<MetricRecord>>> groups;
  for (const auto& r : records) groups[{r.algorithm, r.metric}][r.run_id].push_back(r);

  std::vector<SummaryRow> rows;
  for (Algorithm algorithm : config.effective_algorithms()) {
    const std::string name(algorithm_name(algorithm));
    for (const auto& m : config.effective_metrics()) {
      auto it = groups.find({name, m});
      if (it == groups.end()) continue;
      SummaryRow row{name, epsilon, m, 0.0, 0.0, 0, 0};
      std::vector<double> finals;
      for (const auto& [run_id, series] : it->second) {
        finals.push_back(series.back().value);
        if (plateaued(series, config.iterations)) ++row.n_plateaued;
      }
      row.n = static_cast<int>(finals.size());
      double sum = 0.0;
      for (double v : finals) sum += v;
      row.mean = sum / row.n;
      if (row.n > 1) {
        double ss = 0.0;
        for (double v : finals) ss += (v - row.mean) * (v - row.mean);
        row.std = std::sqrt(ss / (row.n - 1));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string summary_csv(std::span<const SummaryRow> rows, bool with_epsilon) {
  std::string out = with_epsilon ? "algorithm,epsilon,metric,mean,std,n,n_plateaued\n"
                                 : "algorithm,metric,mean,std,n,n_plateaued\n";
  for (const auto& r : rows) {
    out += r.algorithm + ",";
    if (with_epsilon) out += format_short(r.epsilon) + ",";
    out += r.metric + "," + format_double(r.mean) + "," + format_double(r.std) + "," + std::to_string(r.n) + "," +
           std::to_string(r.n_plateaued) + "\n";
  }
  return out;
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("VALAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<long>(n, cap);
  }
  return n;
}

RunOutput run_experiment(const ExperimentConfig& config) {
  config.validate();
  const double epsilon = config.effective_epsilon();
  std::vector<std::vector<MetricRecord>> per_seed(config.seeds.size());
  parallel_for(config.seeds.size(), [&](std::size_t i) {
    per_seed[i] = run_instance(config, make_instance(config, config.seeds[i], epsilon));
  });
  RunOutput output;
  for (auto& records : per_seed)
    output.records.insert(output.records.end(), std::make_move_iterator(records.begin()),
                          std::make_move_iterator(records.end()));
  output.summary = summarize(config, epsilon, output.records);
  return output;
}

SweepOutput sweep_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.epsilon_grid.empty()) throw ConfigError("sweep requires a nonempty epsilon_grid");
  const auto& grid = config.epsilon_grid;
  const std::size_t n_seeds = config.seeds.size();
  std::vector<std::vector<MetricRecord>> per_job(grid.size() * n_seeds);
  parallel_for(per_job.size(), [&](std::size_t job) {
    const double epsilon = grid[job / n_seeds];
    per_job[job] = run_instance(config, make_instance(config, config.seeds[job % n_seeds], epsilon));
  });

  SweepOutput output;
  for (std::size_t e = 0; e < grid.size(); ++e) {
    std::vector<MetricRecord> records;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      auto& job = per_job[e * n_seeds + s];
      records.insert(records.end(), job.begin(), job.end());
      job.clear();
    }
    auto rows = summarize(config, grid[e], records);
    output.summary.insert(output.summary.end(), rows.begin(), rows.end());
    for (const auto& r : records)
      if (r.iteration == config.iterations) output.final_records.push_back(r);
  }
  return output;
}

std::vector<std::filesystem::path> write_run(const ExperimentConfig& config, const RunOutput& output) {
  const auto dir = prepare_out(config);
  std::vector<std::filesystem::path> written;
  for (const auto& m : config.effective_metrics()) {
    std::vector<MetricRecord> subset;
    for (const auto& r : output.records)
      if (r.metric == m) subset.push_back(r);
    if (subset.empty()) continue;
    const auto path = dir / (m + ".csv");
    write_metric_csv(path, subset);
    written.push_back(path);
  }
  const auto summary_path = dir / "summary.csv";
  write_text_file(summary_path, summary_csv(output.summary, false));
  written.push_back(summary_path);
  const auto manifest_path = dir / "manifest.json";
  write_text_file(manifest_path, manifest_json(config, "run", written));
  written.push_back(manifest_path);
  return written;
}

std::vector<std::filesystem::path> write_sweep(const ExperimentConfig& config, const SweepOutput& output) {
  const auto dir = prepare_out(config);
  std::vector<std::filesystem::path> written;
  const auto runs_path = dir / "sweep_runs.csv";
  write_metric_csv(runs_path, output.final_records);
  written.push_back(runs_path);
  const auto summary_path = dir / "sweep_summary.csv";
  write_text_file(summary_path, summary_csv(output.summary, true));
  written.push_back(summary_path);
  const auto manifest_path = dir / "manifest.json";
  write_text_file(manifest_path, manifest_json(config, "sweep", written));
  written.push_back(manifest_path);
  return written;
}

std::vector<std::filesystem::path> write_generate(const ExperimentConfig& config) {
  config.validate();
  const auto dir = prepare_out(config);
  std::vector<std::filesystem::path> written;
  for (std::uint64_t seed : config.seeds) {
    const Instance instance = make_instance(config, seed, config.effective_epsilon());
    const auto bundle_path = dir / ("instance_seed" + std::to_string(seed) + ".json");
    save_bundle(bundle_path, instance_bundle(instance));
    written.push_back(bundle_path);
    const auto traj_path = dir / ("trajectories_seed" + std::to_string(seed) + ".csv");
    write_trajectories_csv(traj_path, instance.trajectories);
    written.push_back(traj_path);
  }
  return written;
}

std::string demo_report() {
  using namespace demo;
  const TabularMdp mdp = demo_two_state_mdp();
  const PolicyTable mu = PolicyTable::uniform(2, 2);
  LearnSpec spec;
  spec.mode = BackupMode::control();
  spec.gamma = kGamma;
  spec.schedule = LrSchedule::constant(0.5);
  spec.target_period = 1;
  spec.update_style = UpdateStyle::incremental;

  auto q = QLearnerState::zeros(2, 2);
  auto va = VaLearnerState::zeros(2, 2);
  const std::array<Transition, 3> steps{{
      {kStateY, kActionA, mdp.reward(kStateY, kActionA), kStateY},
      {kStateY, kActionA, mdp.reward(kStateY, kActionA), kStateY},
      {kStateX, kActionA, mdp.reward(kStateX, kActionA), kStateY},
  }};
  const char* state_names = "xy";
  const char* action_names = "ab";

  std::ostringstream out;
  out << "two-state chain: x -> y under both actions, y absorbing, r(y,a) = 1, gamma = " << format_short(kGamma)
      << "\nlearning rate 0.5, targets refreshed every update, mu_hat uniform\n";
  auto table = [&](const char* label, const QTable& tq, const QTable& tva) {
    out << label << "\n  entry     q_learning  va_learning\n";
    for (int x = 0; x < 2; ++x)
      for (int a = 0; a < 2; ++a) {
        char line[96];
        std::snprintf(line, sizeof line, "  Q(%c,%c)  %11.6f  %11.6f\n", state_names[x], action_names[a], tq(x, a),
                      tva(x, a));
        out << line;
      }
  };
  table("step 0: zero tables", q.q, va.implied_q());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& t = steps[i];
    q_update(q, t, spec);
    va_update(va, t, mu, spec);
    char label[96];
    std::snprintf(label, sizeof label, "step %zu: update on (%c, %c, r=%s, %c)", i + 1, state_names[t.x],
                  action_names[t.a], format_short(t.r).c_str(), state_names[t.x_next]);
    table(label, q.q, va.implied_q());
  }
  out << "Q-learning never touches Q(y,b); VA-learning moves it through the shared V(y).\n";
  return out.str();
}

}  // namespace valab
