#include "valab/io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "valab/errors.hpp"

namespace valab {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw IoError(std::string(what) + ": expected a nonempty array of rows");
  const auto rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw IoError(std::string(what) + ": expected nonempty rows");
  const auto cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != cols) throw IoError(std::string(what) + ": ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number()) throw IoError(std::string(what) + ": non-numeric entry");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
  }
  return m;
}

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw IoError(std::string("invalid JSON: ") + e.what());
  }
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(std::string("field '") + key + "' has the wrong type");
  }
}

json mdp_json(const TabularMdp& mdp) {
  const int s = mdp.num_states();
  const int a = mdp.num_actions();
  json transition = json::array();
  for (int x = 0; x < s; ++x) {
    json per_action = json::array();
    for (int b = 0; b < a; ++b) {
      json row = json::array();
      for (int y = 0; y < s; ++y) row.push_back(mdp.transition(x, b, y));
      per_action.push_back(std::move(row));
    }
    transition.push_back(std::move(per_action));
  }
  json j;
  j["num_states"] = s;
  j["num_actions"] = a;
  j["gamma"] = mdp.gamma();
  j["reward_noise_std"] = mdp.reward_noise_std();
  if (mdp.generator_seed()) j["generator_seed"] = *mdp.generator_seed();
  j["transition"] = std::move(transition);
  j["reward_mean"] = matrix_json(mdp.reward_mean());
  return j;
}

TabularMdp mdp_from(const json& j) {
  const int s = field<int>(j, "num_states");
  const int a = field<int>(j, "num_actions");
  const double gamma = field<double>(j, "gamma");
  const double noise = j.contains("reward_noise_std") ? field<double>(j, "reward_noise_std") : 0.0;
  std::optional<std::uint64_t> seed;
  if (j.contains("generator_seed")) seed = field<std::uint64_t>(j, "generator_seed");
  if (s <= 0 || a <= 0) throw ParameterError("MDP sizes must be positive");

  const json& t = j.at("transition");
  if (!t.is_array() || t.size() != static_cast<std::size_t>(s))
    throw IoError("transition: expected num_states blocks");
  Matrix transition(static_cast<Eigen::Index>(s) * a, s);
  for (int x = 0; x < s; ++x) {
    const Matrix block = matrix_from(t[static_cast<std::size_t>(x)], "transition");
    if (block.rows() != a || block.cols() != s) throw IoError("transition: block shape must be num_actions x num_states");
    transition.middleRows(static_cast<Eigen::Index>(x) * a, a) = block;
  }
  Matrix reward = matrix_from(j.at("reward_mean"), "reward_mean");
  if (reward.rows() != s || reward.cols() != a) throw IoError("reward_mean: shape must be num_states x num_actions");
  return TabularMdp(s, a, std::move(transition), std::move(reward), gamma, noise, seed);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string mdp_to_json(const TabularMdp& mdp) { return mdp_json(mdp).dump(2); }

TabularMdp mdp_from_json(std::string_view text) {
  const json j = parse(text);
  try {
    return mdp_from(j);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed MDP document: ") + e.what());
  }
}

std::string policy_to_json(const PolicyTable& pi) { return matrix_json(pi.matrix()).dump(); }

PolicyTable policy_from_json(std::string_view text) { return PolicyTable(matrix_from(parse(text), "policy")); }

std::string table_to_json(const QTable& q) { return matrix_json(q.matrix()).dump(); }

QTable table_from_json(std::string_view text) { return QTable(matrix_from(parse(text), "table")); }

namespace {

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw IoError(std::string(what) + ": expected a nonempty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw IoError(std::string(what) + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

template <class F>
auto guarded(std::string_view text, F build) {
  const json j = parse(text);
  try {
    return build(j);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed snapshot: ") + e.what());
  }
}

}  // namespace

std::string snapshot_to_json(const QLearnerState& state) {
  json j;
  j["q"] = matrix_json(state.q.matrix());
  j["q_target"] = matrix_json(state.q_target.matrix());
  j["step_count"] = state.step_count;
  return j.dump();
}

QLearnerState q_snapshot_from_json(std::string_view text) {
  return guarded(text, [](const json& j) {
    QLearnerState state{QTable(matrix_from(j.at("q"), "q")), QTable(matrix_from(j.at("q_target"), "q_target")),
                        field<std::int64_t>(j, "step_count")};
    if (state.q.num_states() != state.q_target.num_states() || state.q.num_actions() != state.q_target.num_actions())
      throw IoError("snapshot: online and target shapes differ");
    return state;
  });
}

std::string snapshot_to_json(const VaLearnerState& state) {
  json j;
  j["v"] = vector_json(state.v.vector());
  j["adv"] = matrix_json(state.adv.matrix());
  j["v_target"] = vector_json(state.v_target.vector());
  j["adv_target"] = matrix_json(state.adv_target.matrix());
  j["step_count"] = state.step_count;
  return j.dump();
}

VaLearnerState va_snapshot_from_json(std::string_view text) {
  return guarded(text, [](const json& j) {
    VaLearnerState state{ValueTable(vector_from(j.at("v"), "v")), AdvTable(matrix_from(j.at("adv"), "adv")),
                         ValueTable(vector_from(j.at("v_target"), "v_target")),
                         AdvTable(matrix_from(j.at("adv_target"), "adv_target")), field<std::int64_t>(j, "step_count")};
    const int s = state.v.num_states();
    if (state.adv.num_states() != s || state.v_target.num_states() != s || state.adv_target.num_states() != s ||
        state.adv_target.num_actions() != state.adv.num_actions())
      throw IoError("snapshot: inconsistent table shapes");
    return state;
  });
}

const PolicyTable& Bundle::policy(std::string_view name) const {
  for (const auto& [key, pi] : policies)
    if (key == name) return pi;
  throw ParameterError("bundle has no policy named '" + std::string(name) + "'");
}

std::string bundle_to_json(const Bundle& bundle) {
  json j;
  j["mdp"] = mdp_json(bundle.mdp);
  json policies = json::object();
  for (const auto& [name, pi] : bundle.policies) {
    if (pi.num_states() != bundle.mdp.num_states() || pi.num_actions() != bundle.mdp.num_actions())
      throw ParameterError("policy '" + name + "' does not match the MDP shape");
    policies[name] = matrix_json(pi.matrix());
  }
  j["policies"] = std::move(policies);
  return j.dump(2);
}

Bundle bundle_from_json(std::string_view text) {
  const json j = parse(text);
  if (!j.is_object() || !j.contains("mdp") || !j.contains("policies") || !j["policies"].is_object())
    throw IoError("bundle: expected fields 'mdp' and 'policies'");
  try {
    Bundle bundle{mdp_from(j["mdp"]), {}};
    for (const auto& [name, value] : j["policies"].items()) {
      PolicyTable pi(matrix_from(value, "policy"));
      if (pi.num_states() != bundle.mdp.num_states() || pi.num_actions() != bundle.mdp.num_actions())
        throw IoError("policy '" + name + "' does not match the MDP shape");
      bundle.policies.emplace_back(name, std::move(pi));
    }
    return bundle;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed bundle: ") + e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const Bundle& bundle) {
  write_text_file(path, bundle_to_json(bundle) + "\n");
}

Bundle load_bundle(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return bundle_from_json(text);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace valab
