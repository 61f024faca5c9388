#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifdef VALAB_CLI_PATH

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "valab_cli_test";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + VALAB_CLI_PATH + "\" " + args + " > \"" +
                          (work_dir() / "stdout.txt").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto path = work_dir() / name;
  std::ofstream(path) << text;
  return path;
}

const char* kSmall = R"({"num_states": 5, "num_actions": 3, "gamma": 0.9, "n_traj": 4, "horizon": 10,
                         "iterations": 10, "log_every": 5, "seeds": 2})";

}  // namespace

TEST(Cli, DemoAndVerify) {
  EXPECT_EQ(run("demo"), 0);
  EXPECT_NE(slurp(work_dir() / "stdout.txt").find("Q(y,b)"), std::string::npos);
  EXPECT_EQ(run("verify --level fast"), 0);
  EXPECT_NE(slurp(work_dir() / "stdout.txt").find("PASS"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("run --config " + write_config("bad.json", R"({"gamma": 2})").string()), 2);
  EXPECT_EQ(run("run --config " + write_config("unknown.json", R"({"colour": 1})").string()), 2);
  EXPECT_EQ(run("run --config " + (work_dir() / "missing.json").string()), 3);
  EXPECT_EQ(run("run --no-such-flag"), 2);
  EXPECT_EQ(run("verify --level slow"), 2);
}

TEST(Cli, RunAndSweepAreReproducible) {
  const auto cfg = write_config("small.json", kSmall).string();
  const auto a = work_dir() / "run_a", b = work_dir() / "run_b";
  ASSERT_EQ(run("run --config " + cfg + " --out " + a.string()), 0);
  ASSERT_EQ(run("run --config " + cfg + " --out " + b.string()), 0);
  for (const char* f : {"adv_error.csv", "q_error.csv", "performance.csv", "summary.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_FALSE(slurp(a / "adv_error.csv").empty());

  const auto sa = work_dir() / "sweep_a", sb = work_dir() / "sweep_b";
  ASSERT_EQ(run("sweep --config " + cfg + " --epsilon 0.2,1 --out " + sa.string()), 0);
  ASSERT_EQ(run("sweep --config " + cfg + " --epsilon 0.2,1 --out " + sb.string()), 0);
  EXPECT_EQ(slurp(sa / "sweep_runs.csv"), slurp(sb / "sweep_runs.csv"));
  EXPECT_EQ(slurp(sa / "sweep_summary.csv"), slurp(sb / "sweep_summary.csv"));

  const auto g = work_dir() / "gen";
  ASSERT_EQ(run("generate --config " + cfg + " --out " + g.string()), 0);
  EXPECT_TRUE(fs::exists(g / "instance_seed0.json"));
  EXPECT_TRUE(fs::exists(g / "trajectories_seed1.csv"));
}

#endif
