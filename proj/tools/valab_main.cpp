#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "valab/config.hpp"
#include "valab/errors.hpp"
#include "valab/experiment.hpp"
#include "valab/verify.hpp"

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> seed_count;
  std::optional<std::string> out;
  std::vector<double> epsilon;
  std::optional<std::string> mode;
  std::optional<std::string> algorithms;
  std::optional<int> iterations;
};

void add_experiment_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment config");
  cmd->add_option("--seed", o.seed, "Single seed, or the first seed with --seeds");
  cmd->add_option("--seeds", o.seed_count, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--epsilon", o.epsilon, "Behavior epsilon; a comma list sets the sweep grid")->delimiter(',');
  cmd->add_option("--mode", o.mode, "eval or control");
  cmd->add_option("--algorithms", o.algorithms, "Comma-separated algorithm list");
  cmd->add_option("--iterations", o.iterations, "Training iterations")->check(CLI::NonNegativeNumber);
}

valab::ExperimentConfig build_config(const Overrides& o, bool sweep) {
  valab::ExperimentConfig c = o.config_path.empty() ? valab::ExperimentConfig{} : valab::load_config(o.config_path);
  if (o.mode) {
    c.mode = valab::parse_mode(*o.mode);
    if (!o.algorithms) c.algorithms.clear();
  }
  if (o.algorithms) {
    c.algorithms.clear();
    std::stringstream list(*o.algorithms);
    std::string name;
    while (std::getline(list, name, ','))
      if (!name.empty()) c.algorithms.push_back(valab::parse_algorithm(name));
  }
  if (o.seed_count) {
    const std::uint64_t base = o.seed.value_or(0);
    c.seeds.clear();
    for (int i = 0; i < *o.seed_count; ++i) c.seeds.push_back(base + static_cast<std::uint64_t>(i));
  } else if (o.seed) {
    c.seeds = {*o.seed};
  }
  if (o.out) c.out = *o.out;
  if (o.iterations) c.iterations = *o.iterations;
  if (!o.epsilon.empty()) {
    if (sweep) c.epsilon_grid = o.epsilon;
    else if (o.epsilon.size() == 1) c.epsilon = o.epsilon.front();
    else throw valab::ConfigError("--epsilon takes a single value outside sweep");
  }
  if (sweep && c.epsilon_grid.empty()) c.epsilon_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  c.validate();
  return c;
}

void report(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular VA-learning laboratory"};
  app.set_version_flag("--version", std::string(valab::version()));
  app.require_subcommand(1);

  Overrides generate_o, run_o, sweep_o;
  auto* generate = app.add_subcommand("generate", "Write MDP and policy bundles plus trajectories per seed");
  add_experiment_flags(generate, generate_o);
  auto* run = app.add_subcommand("run", "Train the configured algorithms and write metric CSVs");
  add_experiment_flags(run, run_o);
  auto* sweep = app.add_subcommand("sweep", "Final metrics over an epsilon grid");
  add_experiment_flags(sweep, sweep_o);

  auto* verify = app.add_subcommand("verify", "Certify the convergence and gradient properties");
  std::string level = "fast";
  std::uint64_t verify_seed = 0;
  verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--seed", verify_seed, "First seed of the verification draws");

  app.add_subcommand("demo", "Two-state walkthrough of Q-learning versus VA-learning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (generate->parsed()) {
      report(valab::write_generate(build_config(generate_o, false)));
    } else if (run->parsed()) {
      const auto config = build_config(run_o, false);
      const auto output = valab::run_experiment(config);
      report(valab::write_run(config, output));
      std::cout << valab::summary_csv(output.summary, false);
    } else if (sweep->parsed()) {
      const auto config = build_config(sweep_o, true);
      const auto output = valab::sweep_experiment(config);
      report(valab::write_sweep(config, output));
      std::cout << valab::summary_csv(output.summary, true);
    } else if (verify->parsed()) {
      const auto results =
          valab::run_verification(level == "full" ? valab::VerifyLevel::full : valab::VerifyLevel::fast, verify_seed);
      std::cout << valab::format_results(results);
      for (const auto& r : results)
        if (!r.passed) return kExitVerifyFailed;
    } else {
      std::cout << valab::demo_report();
    }
  } catch (const valab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const valab::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const valab::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
