#include <gtest/gtest.h>

#include <filesystem>

#include "valab/config.hpp"
#include "valab/errors.hpp"
#include "valab/io.hpp"
#include "valab/mdp.hpp"

using namespace valab;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "valab_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

TabularMdp random_mdp(std::uint64_t seed) {
  Rng rng(seed);
  return generate_random_mdp(4, 3, 0.95, 0.5, RewardSpec{}, rng);
}

}  // namespace

TEST(MdpJson, RoundTripIsExact) {
  const auto mdp = random_mdp(1);
  const auto back = mdp_from_json(mdp_to_json(mdp));
  EXPECT_TRUE(back == mdp);
  EXPECT_EQ(back.transition_matrix(), mdp.transition_matrix());
  EXPECT_EQ(back.reward_mean(), mdp.reward_mean());
  const auto demo = demo_two_state_mdp();
  EXPECT_TRUE(mdp_from_json(mdp_to_json(demo)) == demo);
}

TEST(MdpJson, MalformedAndInvalidDocuments) {
  EXPECT_THROW(mdp_from_json("{not json"), IoError);
  EXPECT_THROW(mdp_from_json("[1, 2]"), IoError);
  EXPECT_THROW(mdp_from_json(R"({"num_states": 2})"), IoError);
  // Well-formed but not a distribution.
  const std::string bad = R"({"num_states": 1, "num_actions": 1, "gamma": 0.9, "reward_noise_std": 0,
                              "transition": [[[0.5]]], "reward_mean": [[0.0]]})";
  EXPECT_THROW(mdp_from_json(bad), ParameterError);
  const std::string ok = R"({"num_states": 1, "num_actions": 1, "gamma": 0.9, "reward_noise_std": 0,
                             "transition": [[[1.0]]], "reward_mean": [[0.25]]})";
  EXPECT_EQ(mdp_from_json(ok).reward(0, 0), 0.25);
}

TEST(PolicyAndTableJson, RoundTrip) {
  Rng rng(2);
  Matrix probs(3, 2);
  for (int x = 0; x < 3; ++x) {
    probs(x, 0) = rng.uniform();
    probs(x, 1) = 1.0 - probs(x, 0);
  }
  const PolicyTable pi(probs);
  EXPECT_TRUE(policy_from_json(policy_to_json(pi)) == pi);
  Matrix q(3, 2);
  q << 1.0 / 3, -2e-17, 1e300, 0, -5, 7.125;
  EXPECT_TRUE(table_from_json(table_to_json(QTable(q))) == QTable(q));
  EXPECT_THROW(policy_from_json("[[0.5, 0.6]]"), ParameterError);
  EXPECT_THROW(table_from_json("[[1], [1, 2]]"), IoError);
}

TEST(SnapshotJson, RoundTrip) {
  auto q = QLearnerState::zeros(2, 3);
  q.q(1, 2) = 0.1;
  q.q_target(0, 0) = -4.0;
  q.step_count = 17;
  const auto q_back = q_snapshot_from_json(snapshot_to_json(q));
  EXPECT_EQ(q_back.q, q.q);
  EXPECT_EQ(q_back.q_target, q.q_target);
  EXPECT_EQ(q_back.step_count, 17);

  auto va = VaLearnerState::zeros(2, 3);
  va.v(1) = 1.0 / 7;
  va.adv(0, 2) = 2.5;
  va.v_target(0) = 3.0;
  va.step_count = 9;
  const auto va_back = va_snapshot_from_json(snapshot_to_json(va));
  EXPECT_EQ(va_back.v, va.v);
  EXPECT_EQ(va_back.adv, va.adv);
  EXPECT_EQ(va_back.v_target, va.v_target);
  EXPECT_EQ(va_back.adv_target, va.adv_target);
  EXPECT_EQ(va_back.step_count, 9);
  EXPECT_THROW(va_snapshot_from_json("{}"), IoError);
}

TEST(Bundle, SaveLoadAndLookup) {
  Rng rng(3);
  const auto mdp = random_mdp(3);
  const auto pi_det = random_deterministic_policy(4, 3, rng);
  Bundle bundle{mdp, {{"pi_det", pi_det}, {"behavior", mixed_policy(0.8, pi_det)}}};
  const auto path = temp_dir() / "bundle.json";
  save_bundle(path, bundle);
  const auto back = load_bundle(path);
  EXPECT_TRUE(back.mdp == mdp);
  ASSERT_EQ(back.policies.size(), 2u);
  EXPECT_TRUE(back.policy("behavior") == mixed_policy(0.8, pi_det));
  EXPECT_THROW(back.policy("missing"), ParameterError);
  EXPECT_THROW(load_bundle(temp_dir() / "does_not_exist.json"), IoError);
  EXPECT_THROW(write_text_file(temp_dir() / "no_dir" / "x" / "f.json", "{}"), IoError);
}

TEST(Config, Defaults) {
  ExperimentConfig c;
  EXPECT_EQ(c.num_states, 20);
  EXPECT_EQ(c.num_actions, 5);
  EXPECT_EQ(c.gamma, 0.99);
  EXPECT_EQ(c.n_traj, 20);
  EXPECT_EQ(c.effective_horizon(), 200);
  EXPECT_EQ(c.iterations, 2000);
  EXPECT_EQ(c.seeds.size(), 20u);
  EXPECT_EQ(c.target_period, 10);
  EXPECT_EQ(lr_at(c.schedule, 0), 0.1);
  EXPECT_EQ(c.effective_epsilon(), 0.8);
  c.mode = ExperimentMode::evaluation;
  EXPECT_EQ(c.effective_epsilon(), 1.0);
  EXPECT_EQ(c.effective_algorithms(), (std::vector<Algorithm>{Algorithm::td_learning, Algorithm::va_learning}));
  for (const auto& m : c.effective_metrics()) EXPECT_NE(m, "performance");
  ExperimentConfig control;
  EXPECT_EQ(control.effective_algorithms().size(), 4u);
  EXPECT_EQ(control.effective_metrics().size(), 5u);
  EXPECT_NO_THROW(control.validate());
}

TEST(Config, JsonParsingAndErrors) {
  const auto c = config_from_json(R"({"num_states": 5, "seeds": 3, "horizon": "auto", "loss": "huber",
                                      "huber_tau": 2.0, "lr_schedule": "robbins_monro", "lr_c": 1.0,
                                      "lr_t0": 10, "lr_exponent": 0.7, "mode": "eval"})");
  EXPECT_EQ(c.num_states, 5);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_FALSE(c.horizon.has_value());
  EXPECT_EQ(c.loss.kind, Loss::Kind::huber);
  EXPECT_EQ(c.loss.tau, 2.0);
  EXPECT_EQ(c.schedule.kind, LrSchedule::Kind::robbins_monro);
  EXPECT_EQ(c.mode, ExperimentMode::evaluation);
  EXPECT_EQ(config_from_json(R"({"seeds": [4, 9]})").seeds, (std::vector<std::uint64_t>{4, 9}));

  EXPECT_THROW(config_from_json(R"({"num_state": 5})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"num_states": "five"})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"gamma": 1.0})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"epsilon": 1.5})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"lr_schedule": "robbins_monro", "lr_exponent": 0.4})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"mode": "control", "algorithms": ["td_learning"]})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"mode": "evaluation", "algorithms": ["q_learning"]})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"mode": "evaluation", "metrics": ["performance"]})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"algorithms": ["sarsa"]})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"update_style": "synchronous_sa"})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"seeds": [1, 1]})"), ConfigError);
  EXPECT_THROW(config_from_json("[]"), ConfigError);
  EXPECT_THROW(config_from_json("{"), ConfigError);
  EXPECT_THROW(load_config(temp_dir() / "missing_config.json"), IoError);
}

TEST(Config, CanonicalRoundTripAndHash) {
  ExperimentConfig c;
  c.epsilon = 0.4;
  c.algorithms = {Algorithm::va_learning, Algorithm::q_learning};
  c.horizon = 50;
  c.update_style = UpdateStyle::incremental;
  c.stream_order = StreamOrder::shuffled;
  c.metrics = {"adv_error"};
  const std::string text = config_to_json(c);
  const auto back = config_from_json(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(config_hash(back), config_hash(c));
  auto other_out = c;
  other_out.out = "elsewhere";
  EXPECT_EQ(config_hash(other_out), config_hash(c));
  auto other_gamma = c;
  other_gamma.gamma = 0.98;
  EXPECT_NE(config_hash(other_gamma), config_hash(c));
}

TEST(Config, NamesRoundTrip) {
  for (auto a : {Algorithm::q_learning, Algorithm::td_learning, Algorithm::va_learning, Algorithm::dueling_uniform,
                 Algorithm::dueling_behavior})
    EXPECT_EQ(parse_algorithm(algorithm_name(a)), a);
  EXPECT_EQ(parse_mode("control"), ExperimentMode::control);
  EXPECT_THROW(parse_mode("offline"), ConfigError);
  EXPECT_FALSE(version().empty());
}
