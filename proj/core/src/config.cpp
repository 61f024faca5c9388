#include "valab/config.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <nlohmann/json.hpp>

#include "valab/analysis.hpp"
#include "valab/errors.hpp"
#include "valab/io.hpp"

namespace valab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 5> kAlgorithmNames{{
    {Algorithm::q_learning, "q_learning"},
    {Algorithm::td_learning, "td_learning"},
    {Algorithm::va_learning, "va_learning"},
    {Algorithm::dueling_uniform, "dueling_uniform"},
    {Algorithm::dueling_behavior, "dueling_behavior"},
}};

bool valid_for(Algorithm algorithm, ExperimentMode mode) {
  if (algorithm == Algorithm::q_learning) return mode == ExperimentMode::control;
  if (algorithm == Algorithm::td_learning) return mode == ExperimentMode::evaluation;
  return true;
}

bool is_dueling(Algorithm algorithm) {
  return algorithm == Algorithm::dueling_uniform || algorithm == Algorithm::dueling_behavior;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config field '" + key + "': " + why);
}

template <class T>
T get(const json& value, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!value.is_boolean()) bad(key, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!value.is_number_integer()) bad(key, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (value.is_number_integer() && !value.is_number_unsigned() && value.get<std::int64_t>() < 0)
          bad(key, "expected a nonnegative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!value.is_number()) bad(key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!value.is_string()) bad(key, "expected a string");
    }
    return value.get<T>();
  } catch (const json::exception& e) {
    bad(key, e.what());
  }
}

std::string_view update_style_name(UpdateStyle style) {
  switch (style) {
    case UpdateStyle::incremental: return "incremental";
    case UpdateStyle::batch_gradient: return "batch_gradient";
    case UpdateStyle::synchronous_sa: return "synchronous_sa";
  }
  return "";
}

}  // namespace

std::string_view version() { return VALAB_VERSION_STRING; }

std::string_view algorithm_name(Algorithm algorithm) {
  for (const auto& [value, name] : kAlgorithmNames)
    if (value == algorithm) return name;
  throw InternalError("unnamed algorithm");
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [value, known] : kAlgorithmNames)
    if (known == name) return value;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view mode_name(ExperimentMode mode) {
  return mode == ExperimentMode::control ? "control" : "evaluation";
}

ExperimentMode parse_mode(std::string_view name) {
  if (name == "control") return ExperimentMode::control;
  if (name == "evaluation" || name == "eval") return ExperimentMode::evaluation;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected eval or control)");
}

ExperimentConfig::ExperimentConfig() {
  for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);
}

double ExperimentConfig::effective_epsilon() const {
  if (epsilon) return *epsilon;
  return mode == ExperimentMode::control ? 0.8 : 1.0;
}

int ExperimentConfig::effective_horizon() const { return horizon ? *horizon : default_horizon(gamma); }

std::vector<Algorithm> ExperimentConfig::effective_algorithms() const {
  if (!algorithms.empty()) return algorithms;
  if (mode == ExperimentMode::control)
    return {Algorithm::q_learning, Algorithm::va_learning, Algorithm::dueling_uniform, Algorithm::dueling_behavior};
  return {Algorithm::td_learning, Algorithm::va_learning};
}

std::vector<std::string> ExperimentConfig::effective_metrics() const {
  if (!metrics.empty()) return metrics;
  std::vector<std::string> names;
  const auto algos = effective_algorithms();
  const bool any_dueling = std::any_of(algos.begin(), algos.end(), is_dueling);
  for (auto name : metric_registry()) {
    if (name == metric::kPerformance && mode != ExperimentMode::control) continue;
    if ((name == metric::kAdvNormNu || name == metric::kAdvNormMu) && !any_dueling) continue;
    names.emplace_back(name);
  }
  return names;
}

void ExperimentConfig::validate() const {
  if (num_states < 2) bad("num_states", "must be at least 2");
  if (num_actions < 1) bad("num_actions", "must be at least 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) bad("gamma", "must lie in [0, 1)");
  if (!(dirichlet_alpha > 0.0)) bad("dirichlet_alpha", "must be positive");
  if (!(reward_noise_std >= 0.0)) bad("reward_noise_std", "must be nonnegative");
  if (epsilon && !(*epsilon >= 0.0 && *epsilon <= 1.0)) bad("epsilon", "must lie in [0, 1]");
  for (double e : epsilon_grid)
    if (!(e >= 0.0 && e <= 1.0)) bad("epsilon_grid", "entries must lie in [0, 1]");
  if (!(target_epsilon >= 0.0 && target_epsilon <= 1.0)) bad("target_epsilon", "must lie in [0, 1]");
  std::set<Algorithm> seen;
  for (Algorithm a : algorithms) {
    if (!valid_for(a, mode))
      bad("algorithms", std::string(algorithm_name(a)) + " is not available in " + std::string(mode_name(mode)) + " mode");
    if (!seen.insert(a).second) bad("algorithms", "duplicate " + std::string(algorithm_name(a)));
  }
  try {
    schedule.validate();
  } catch (const ParameterError& e) {
    bad("lr_schedule", e.what());
  }
  if (target_period < 1) bad("target_period", "must be at least 1");
  if (n_step < 1) bad("n_step", "must be at least 1");
  if (loss.kind == Loss::Kind::huber && !(loss.tau > 0.0)) bad("huber_tau", "must be positive");
  if (update_style == UpdateStyle::synchronous_sa)
    bad("update_style", "synchronous_sa samples the model directly and is only available in verify");
  if (!(behavior_smoothing >= 0.0)) bad("behavior_smoothing", "must be nonnegative");
  if (n_traj < 1) bad("n_traj", "must be at least 1");
  if (horizon && *horizon < 1) bad("horizon", "must be at least 1");
  if (start_state < 0 || start_state >= num_states) bad("start_state", "out of range");
  if (iterations < 0) bad("iterations", "must be nonnegative");
  if (log_every < 1) bad("log_every", "must be at least 1");
  if (seeds.empty()) bad("seeds", "must be nonempty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) bad("seeds", "duplicate seed");
  std::set<std::string> metric_seen;
  for (const auto& m : metrics) {
    if (!is_registered_metric(m)) bad("metrics", "unknown metric '" + m + "'");
    if (!metric_seen.insert(m).second) bad("metrics", "duplicate metric '" + m + "'");
    if (m == metric::kPerformance && mode != ExperimentMode::control)
      bad("metrics", "performance is only defined in control mode");
  }
  if (out.empty()) bad("out", "must be nonempty");
}

ExperimentConfig config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;
  for (const auto& [key, value] : doc.items()) {
    if (key == "num_states") c.num_states = get<int>(value, key);
    else if (key == "num_actions") c.num_actions = get<int>(value, key);
    else if (key == "gamma") c.gamma = get<double>(value, key);
    else if (key == "dirichlet_alpha") c.dirichlet_alpha = get<double>(value, key);
    else if (key == "reward_noise_std") c.reward_noise_std = get<double>(value, key);
    else if (key == "mode") c.mode = parse_mode(get<std::string>(value, key));
    else if (key == "epsilon") {
      if (value.is_null()) c.epsilon.reset();
      else c.epsilon = get<double>(value, key);
    } else if (key == "epsilon_grid") {
      if (!value.is_array()) bad(key, "expected an array");
      c.epsilon_grid.clear();
      for (const auto& e : value) c.epsilon_grid.push_back(get<double>(e, key));
    } else if (key == "target_epsilon") c.target_epsilon = get<double>(value, key);
    else if (key == "algorithms") {
      if (!value.is_array()) bad(key, "expected an array");
      c.algorithms.clear();
      for (const auto& a : value) c.algorithms.push_back(parse_algorithm(get<std::string>(a, key)));
    } else if (key == "lr") c.schedule.lr = get<double>(value, key);
    else if (key == "lr_schedule") {
      const auto kind = get<std::string>(value, key);
      if (kind == "constant") c.schedule.kind = LrSchedule::Kind::constant;
      else if (kind == "robbins_monro") c.schedule.kind = LrSchedule::Kind::robbins_monro;
      else bad(key, "expected constant or robbins_monro");
    } else if (key == "lr_c") c.schedule.c = get<double>(value, key);
    else if (key == "lr_t0") c.schedule.t0 = get<double>(value, key);
    else if (key == "lr_exponent") c.schedule.exponent = get<double>(value, key);
    else if (key == "target_period") c.target_period = get<int>(value, key);
    else if (key == "n_step") c.n_step = get<int>(value, key);
    else if (key == "loss") {
      const auto kind = get<std::string>(value, key);
      if (kind == "square") c.loss.kind = Loss::Kind::square;
      else if (kind == "huber") c.loss.kind = Loss::Kind::huber;
      else bad(key, "expected square or huber");
    } else if (key == "huber_tau") c.loss.tau = get<double>(value, key);
    else if (key == "update_style") {
      const auto style = get<std::string>(value, key);
      if (style == "incremental") c.update_style = UpdateStyle::incremental;
      else if (style == "batch_gradient") c.update_style = UpdateStyle::batch_gradient;
      else if (style == "synchronous_sa") c.update_style = UpdateStyle::synchronous_sa;
      else bad(key, "expected incremental or batch_gradient");
    } else if (key == "online_value_baseline") c.online_value_baseline = get<bool>(value, key);
    else if (key == "stream_order") {
      const auto order = get<std::string>(value, key);
      if (order == "sequential") c.stream_order = StreamOrder::sequential;
      else if (order == "shuffled") c.stream_order = StreamOrder::shuffled;
      else bad(key, "expected sequential or shuffled");
    } else if (key == "behavior_smoothing") c.behavior_smoothing = get<double>(value, key);
    else if (key == "n_traj") c.n_traj = get<int>(value, key);
    else if (key == "horizon") {
      if (value.is_string() && value.get<std::string>() == "auto") c.horizon.reset();
      else c.horizon = get<int>(value, key);
    } else if (key == "start_state") c.start_state = get<int>(value, key);
    else if (key == "iterations") c.iterations = get<int>(value, key);
    else if (key == "log_every") c.log_every = get<int>(value, key);
    else if (key == "seeds") {
      c.seeds.clear();
      if (value.is_number_integer()) {
        const auto n = get<int>(value, key);
        if (n < 1) bad(key, "count must be positive");
        for (int s = 0; s < n; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
      } else if (value.is_array()) {
        for (const auto& s : value) c.seeds.push_back(get<std::uint64_t>(s, key));
      } else {
        bad(key, "expected a count or an array of seeds");
      }
    } else if (key == "metrics") {
      if (!value.is_array()) bad(key, "expected an array");
      c.metrics.clear();
      for (const auto& m : value) c.metrics.push_back(get<std::string>(m, key));
    } else if (key == "out") c.out = get<std::string>(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["num_states"] = c.num_states;
  j["num_actions"] = c.num_actions;
  j["gamma"] = c.gamma;
  j["dirichlet_alpha"] = c.dirichlet_alpha;
  j["reward_noise_std"] = c.reward_noise_std;
  j["mode"] = mode_name(c.mode);
  j["epsilon"] = c.epsilon ? ordered_json(*c.epsilon) : ordered_json(nullptr);
  j["epsilon_grid"] = c.epsilon_grid;
  j["target_epsilon"] = c.target_epsilon;
  auto algos = ordered_json::array();
  for (Algorithm a : c.algorithms) algos.push_back(algorithm_name(a));
  j["algorithms"] = std::move(algos);
  j["lr"] = c.schedule.lr;
  j["lr_schedule"] = c.schedule.kind == LrSchedule::Kind::constant ? "constant" : "robbins_monro";
  j["lr_c"] = c.schedule.c;
  j["lr_t0"] = c.schedule.t0;
  j["lr_exponent"] = c.schedule.exponent;
  j["target_period"] = c.target_period;
  j["n_step"] = c.n_step;
  j["loss"] = c.loss.kind == Loss::Kind::square ? "square" : "huber";
  j["huber_tau"] = c.loss.tau;
  j["update_style"] = update_style_name(c.update_style);
  j["online_value_baseline"] = c.online_value_baseline;
  j["stream_order"] = c.stream_order == StreamOrder::sequential ? "sequential" : "shuffled";
  j["behavior_smoothing"] = c.behavior_smoothing;
  j["n_traj"] = c.n_traj;
  j["horizon"] = c.horizon ? ordered_json(*c.horizon) : ordered_json("auto");
  j["start_state"] = c.start_state;
  j["iterations"] = c.iterations;
  j["log_every"] = c.log_every;
  j["seeds"] = c.seeds;
  j["metrics"] = c.metrics;
  j["out"] = c.out;
  return j.dump(2);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return config_from_json(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  ExperimentConfig keyed = config;
  keyed.out = "-";
  const std::string text = config_to_json(keyed);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace valab
