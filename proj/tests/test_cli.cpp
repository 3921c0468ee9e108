#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Invocation {
  int exit_code;
  std::string output;  // stdout + stderr
};

Invocation run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli_output.txt";
  const std::string cmd =
      std::string(AFC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Invocation result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  return result;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("afc_cli_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("simulate with defaults writes the full log and manifest") {
  const auto dir = fresh_dir("simulate");
  const auto res = run_cli("simulate --out " + (dir / "run").string(), dir);
  REQUIRE(res.exit_code == 0);
  const fs::path csv = dir / "run" / "timeseries.csv";
  const fs::path manifest = dir / "run" / "manifest.txt";
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(manifest));
  CHECK(line_count(csv) == 20001);  // header + one row per control sample

  const std::string m = slurp(manifest);
  for (const std::string key :
       {"t_end", "plant_rate", "control_rate", "x0", "mu", "b", "m", "delta_l",
        "delta_r", "lambda", "kappa", "phi", "centers", "log_dhat", "seedless",
        "started_at", "finished_at", "output_timeseries", "metric_rms_xtilde_last_quarter",
        "metric_max_abs_epsilon", "metric_final_v"})
    CHECK(m.find(key + " = ") != std::string::npos);
}

TEST_CASE("zero duration still produces a valid header") {
  const auto dir = fresh_dir("zero");
  const auto res = run_cli("simulate --t-end 0 --out " + (dir / "run").string(), dir);
  REQUIRE(res.exit_code == 0);
  CHECK(slurp(dir / "run" / "timeseries.csv") ==
        "t,x,xdot,xd,xddot,u,upsilon,uhat,epsilon,dhat,dtrue\n");
}

TEST_CASE("flag overrides beat the config file") {
  const auto dir = fresh_dir("override");
  std::ofstream(dir / "config.txt") << "phi = 3\nt_end = 1\n";
  const auto res = run_cli("simulate --config " + (dir / "config.txt").string() +
                               " --phi 0 --out " + (dir / "run").string(),
                           dir);
  REQUIRE(res.exit_code == 0);
  CHECK(slurp(dir / "run" / "manifest.txt").find("phi = 0\n") != std::string::npos);
}

TEST_CASE("custom centers flow through to the logged columns") {
  const auto dir = fresh_dir("centers");
  const auto res = run_cli("simulate --t-end 0.01 --centers -1,0,1 --log-dhat true "
                           "--out " + (dir / "run").string(),
                           dir);
  REQUIRE(res.exit_code == 0);
  std::ifstream in(dir / "run" / "timeseries.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,x,xdot,xd,xddot,u,upsilon,uhat,epsilon,dhat,dtrue,Dhat_1,Dhat_2,Dhat_3");
}

TEST_CASE("invalid config exits with code 2 naming the key") {
  const auto dir = fresh_dir("badcfg");
  std::ofstream(dir / "config.txt") << "kappa = -4\n";
  const auto res = run_cli("simulate --config " + (dir / "config.txt").string() +
                               " --out " + (dir / "run").string(),
                           dir);
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("kappa") != std::string::npos);

  const auto bad_key = run_cli("simulate --bogus 1 --out x", dir);
  CHECK(bad_key.exit_code != 0);

  const auto bad_value =
      run_cli("simulate --kappa fast --out " + (dir / "run2").string(), dir);
  CHECK(bad_value.exit_code == 2);
  CHECK(bad_value.output.find("kappa") != std::string::npos);
}

TEST_CASE("divergence exits with code 3 and a time stamp") {
  const auto dir = fresh_dir("diverge");
  const auto res = run_cli(
      "simulate --kappa 500 --control-rate 100 --plant-rate 100 --out " +
          (dir / "run").string(),
      dir);
  CHECK(res.exit_code == 3);
  CHECK(res.output.find("t = ") != std::string::npos);
}

TEST_CASE("verify passes on the shipped defaults") {
  const auto dir = fresh_dir("verify");
  const auto res = run_cli("verify", dir);
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("[FAIL]") == std::string::npos);
  std::size_t passes = 0;
  for (std::size_t pos = 0; (pos = res.output.find("[PASS]", pos)) != std::string::npos;
       ++pos)
    ++passes;
  CHECK(passes == 12);
  CHECK(res.output.find("lyapunov_surrogate") != std::string::npos);
  CHECK(res.output.find("partition_of_unity") != std::string::npos);
}

TEST_CASE("sweep emits one row per value") {
  const auto dir = fresh_dir("sweep");
  std::ofstream(dir / "config.txt") << "t_end = 4\n";
  const auto res2 = run_cli("sweep --config " + (dir / "config.txt").string() +
                                " --param kappa --values 1,10,100 --out " +
                                (dir / "out").string(),
                            dir);
  REQUIRE(res2.exit_code == 0);
  const fs::path csv = dir / "out" / "sweep.csv";
  REQUIRE(fs::exists(csv));
  REQUIRE(line_count(csv) == 4);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "value,rms_xtilde,max_abs_u,epsilon_converged");
  CHECK(fs::exists(dir / "out" / "manifest.txt"));
  CHECK(slurp(dir / "out" / "manifest.txt").find("sweep_param = kappa") !=
        std::string::npos);
}

TEST_CASE("sweep with an empty value list writes just the header") {
  const auto dir = fresh_dir("sweep_empty");
  const auto res =
      run_cli("sweep --param phi --values \"\" --out " + (dir / "out").string(), dir);
  REQUIRE(res.exit_code == 0);
  CHECK(slurp(dir / "out" / "sweep.csv") ==
        "value,rms_xtilde,max_abs_u,epsilon_converged\n");
}

TEST_CASE("sweeping an unknown parameter exits with code 2") {
  const auto dir = fresh_dir("sweep_bad");
  const auto res = run_cli(
      "sweep --param t_end --values 1,2 --out " + (dir / "out").string(), dir);
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("t_end") != std::string::npos);
}
