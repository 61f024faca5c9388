#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "valab/experiment.hpp"
#include "valab/verify.hpp"

using namespace valab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!outcome.passed) ++failures;
  std::printf("%s %s: %s (%.1f s)\n", outcome.passed ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str(), seconds);
  std::fflush(stdout);
}

Outcome from_check(const CheckResult& r, double seconds_limit, double seconds) {
  Outcome o{r.passed && seconds < seconds_limit, r.detail};
  char buf[96];
  std::snprintf(buf, sizeof buf, " measured=%.3g threshold=%.3g", r.measured, r.threshold);
  o.detail += buf;
  if (seconds >= seconds_limit) o.detail += " over time limit";
  return o;
}

template <class F>
Outcome timed_check(double seconds_limit, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  const CheckResult r = f();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return from_check(r, seconds_limit, seconds);
}

/// P(Binomial(n, 1/2) >= wins).
double sign_test_p(int wins, int n) {
  double p = 0.0;
  for (int k = wins; k <= n; ++k) p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  return p;
}

/// seed -> algorithm -> final value of one metric.
using Finals = std::map<std::uint64_t, std::map<std::string, double>>;

Finals finals_of(const std::vector<MetricRecord>& records, const std::string& metric, std::int64_t iteration) {
  Finals out;
  for (const auto& r : records)
    if (r.metric == metric && r.iteration == iteration) out[r.seed][r.algorithm] = r.value;
  return out;
}

struct Paired {
  double mean_diff = 0.0;  // mean of (better - worse) with better expected larger
  int wins = 0;
  int n = 0;
  double p = 1.0;
};

/// Pairs larger-is-better values; ties are dropped from the sign test.
Paired paired(const Finals& finals, const std::string& challenger, const std::string& baseline) {
  Paired out;
  int count = 0;
  for (const auto& [seed, by_alg] : finals) {
    const double d = by_alg.at(challenger) - by_alg.at(baseline);
    out.mean_diff += d;
    ++count;
    if (d > 0) ++out.wins;
    if (d != 0) ++out.n;
  }
  out.mean_diff /= count;
  out.p = sign_test_p(out.wins, out.n);
  return out;
}

std::string describe(const Paired& p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean diff %.4g, wins %d/%d, sign-test p %.3g", p.mean_diff, p.wins, p.n, p.p);
  return buf;
}

std::string read_file(const std::filesystem::path& p) { return read_text_file(p); }

ExperimentConfig protocol_config() {
  ExperimentConfig c;
  c.log_every = c.iterations;
  return c;
}

}  // namespace

int main() {
  std::printf("acceptance checks, %d worker thread(s)\n", worker_count());

  report("recursion_rates", [] { return timed_check(10.0, [] { return verify_recursion_rates(0, 20, 500); }); });
  report("transformed_q_identity", [] { return timed_check(1e9, [] { return verify_transformed_identity(0, 200); }); });
  report("expected_update_reduction", [] { return timed_check(1e9, [] { return verify_expected_update(0, 50); }); });
  report("dueling_gradient_equivalence", [] { return timed_check(1e9, [] { return verify_gradient_equivalence(0, 100); }); });
  report("behavior_minimizes_adv_norm", [] { return timed_check(1e9, [] { return verify_behavior_minimizer(0, 20, 50); }); });
  report("synchronous_sa_convergence",
         [] { return timed_check(60.0, [] { return verify_synchronous_sa(0, 5, 2, 100000); }); });

  // Control protocol at epsilon 0.8, shared by the performance and norm claims.
  RunOutput control;
  double control_seconds = 0.0;
  {
    const auto start = std::chrono::steady_clock::now();
    try {
      auto c = protocol_config();
      c.epsilon = 0.8;
      control = run_experiment(c);
    } catch (const std::exception& e) {
      std::printf("control run failed: %s\n", e.what());
    }
    control_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  const std::int64_t final_it = protocol_config().iterations;

  report("control_performance_beats_q_learning", [&] {
    const auto perf = finals_of(control.records, "performance", final_it);
    if (perf.size() != 20) return Outcome{false, "missing runs"};
    const auto va = paired(perf, "va_learning", "q_learning");
    const auto bd = paired(perf, "dueling_behavior", "q_learning");
    const bool ok = va.mean_diff > 0 && va.p < 0.05 && bd.mean_diff > 0 && bd.p < 0.05 && control_seconds < 300.0;
    return Outcome{ok, "va vs q: " + describe(va) + "; behavior dueling vs q: " + describe(bd) +
                           "; run " + std::to_string(static_cast<int>(control_seconds)) + " s"};
  });

  report("behavior_dueling_smaller_mu_norm", [&] {
    const auto norms = finals_of(control.records, "adv_norm_mu", final_it);
    if (norms.size() != 20) return Outcome{false, "missing runs"};
    double bd = 0.0, ud = 0.0;
    for (const auto& [seed, by_alg] : norms) {
      bd += by_alg.at("dueling_behavior");
      ud += by_alg.at("dueling_uniform");
    }
    bd /= 20.0;
    ud /= 20.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "mean behavior %.4g, mean uniform %.4g", bd, ud);
    return Outcome{bd <= ud, buf};
  });

  report("evaluation_advantage_error_va_below_td", [] {
    auto c = protocol_config();
    c.mode = ExperimentMode::evaluation;
    c.epsilon = 1.0;
    const auto out = run_experiment(c);
    const auto errors = finals_of(out.records, "adv_error", c.iterations);
    // Smaller is better: pair as (td - va).
    const auto p = paired(errors, "td_learning", "va_learning");
    double va = 0.0, td = 0.0;
    for (const auto& [seed, by_alg] : errors) {
      va += by_alg.at("va_learning");
      td += by_alg.at("td_learning");
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "mean va %.4g, mean td %.4g; ", va / 20.0, td / 20.0);
    return Outcome{p.mean_diff > 0 && p.p < 0.05, buf + describe(p)};
  });

  report("uniform_dueling_gap_shrinks_with_epsilon", [] {
    auto c = protocol_config();
    c.epsilon_grid = {0.2, 1.0};
    const auto sweep = sweep_experiment(c);
    std::map<std::string, Finals> by_eps;
    for (const auto& r : sweep.final_records)
      if (r.metric == "performance") by_eps[r.run_id.substr(0, r.run_id.find('_'))][r.seed][r.algorithm] = r.value;
    const auto low = paired(by_eps.at("eps0.2"), "dueling_behavior", "dueling_uniform");
    const auto high = paired(by_eps.at("eps1"), "dueling_behavior", "dueling_uniform");
    char buf[160];
    std::snprintf(buf, sizeof buf, "gap at 0.2 = %.4g, gap at 1.0 = %.4g", low.mean_diff, high.mean_diff);
    return Outcome{std::abs(high.mean_diff) < std::abs(low.mean_diff), buf};
  });

  report("byte_identical_reruns", [] {
    const auto root = std::filesystem::temp_directory_path() / "valab_acceptance_determinism";
    auto c = protocol_config();
    c.iterations = 200;
    c.log_every = 10;
    c.seeds = {0, 1, 2, 3, 4};
    c.epsilon_grid = {0.2, 0.8};
    std::vector<std::filesystem::path> files[2];
    for (int rep = 0; rep < 2; ++rep) {
      c.out = (root / ("rep" + std::to_string(rep))).string();
      auto run_files = write_run(c, run_experiment(c));
      auto sweep_cfg = c;
      sweep_cfg.out = (root / ("sweep" + std::to_string(rep))).string();
      auto sweep_files = write_sweep(sweep_cfg, sweep_experiment(sweep_cfg));
      files[rep] = run_files;
      files[rep].insert(files[rep].end(), sweep_files.begin(), sweep_files.end());
    }
    int compared = 0;
    for (std::size_t i = 0; i < files[0].size(); ++i) {
      if (files[0][i].extension() != ".csv") continue;
      if (read_file(files[0][i]) != read_file(files[1][i]))
        return Outcome{false, files[0][i].filename().string() + " differs"};
      ++compared;
    }
    return Outcome{compared > 0, std::to_string(compared) + " CSV files identical"};
  });

  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
