#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "afc/config.hpp"
#include "afc/csv.hpp"
#include "afc/sim.hpp"

using afc::ConfigError;
using afc::format_double;
using afc::parse_config_text;
using afc::read_timeseries_csv;
using afc::run_closed_loop;
using afc::SimConfig;
using afc::write_timeseries_csv;

TEST_CASE("empty config text resolves to the reference defaults") {
  const SimConfig cfg = parse_config_text("");
  CHECK(cfg.t_end == 40.0);
  CHECK(cfg.plant_rate == 1000.0);
  CHECK(cfg.control_rate == 500.0);
  CHECK(cfg.x0 == std::vector<double>{0.0, 0.0});
  CHECK(cfg.mu == 1.0);
  CHECK(cfg.b == 1.0);
  CHECK(cfg.m == 1.0);
  CHECK(cfg.delta_l == -0.4);
  CHECK(cfg.delta_r == 0.3);
  CHECK(cfg.lambda == 0.6);
  CHECK(cfg.kappa == 10.0);
  CHECK(cfg.phi == 3.0);
  CHECK(cfg.centers == std::vector<double>{-0.5, -0.1, -0.05, 0.0, 0.05, 0.1, 0.5});
  CHECK_FALSE(cfg.log_dhat);
  CHECK(cfg.seedless);
}

TEST_CASE("config parsing handles comments, blanks and lists") {
  const std::string text =
      "# reference experiment, tweaked\n"
      "t_end = 12.5   # shorter run\n"
      "\n"
      "x0 = 2, 0\n"
      "centers = -1,-0.25,0,0.25,1\n"
      "log_dhat = true\n"
      "kappa=25\n";
  const SimConfig cfg = parse_config_text(text);
  CHECK(cfg.t_end == 12.5);
  CHECK(cfg.x0 == std::vector<double>{2.0, 0.0});
  CHECK(cfg.centers == std::vector<double>{-1.0, -0.25, 0.0, 0.25, 1.0});
  CHECK(cfg.log_dhat);
  CHECK(cfg.kappa == 25.0);
}

TEST_CASE("config errors carry the offending key") {
  auto key_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("ok");
  };
  CHECK(key_of("bogus = 1\n") == "bogus");
  CHECK(key_of("kappa = fast\n") == "kappa");
  CHECK(key_of("x0 = 1;2\n") == "x0");
  CHECK(key_of("log_dhat = maybe\n") == "log_dhat");
  CHECK(key_of("just some text\n") == "line 1");
  CHECK(key_of("t_end = 40\nphi : 3\n") == "line 2");
}

TEST_CASE("the last assignment of a repeated key wins") {
  const SimConfig cfg = parse_config_text("kappa = 5\nkappa = 7\n");
  CHECK(cfg.kappa == 7.0);
}

TEST_CASE("config text round-trips through the parser") {
  SimConfig cfg;
  cfg.t_end = 7.25;
  cfg.x0 = {0.1, -0.2};
  cfg.delta_l = -0.123456789012345;
  cfg.centers = {-2.0, -1.0 / 3.0, 0.7};
  cfg.log_dhat = true;
  const SimConfig back = parse_config_text(afc::config_to_text(cfg));
  CHECK(back.t_end == cfg.t_end);
  CHECK(back.x0 == cfg.x0);
  CHECK(back.delta_l == cfg.delta_l);
  CHECK(back.centers == cfg.centers);
  CHECK(back.log_dhat == cfg.log_dhat);
}

TEST_CASE("doubles survive the 17-digit text form") {
  for (const double v : {0.1, -0.0, 1.0 / 3.0, 1e-300, 6.02e23, -0.425e-17}) {
    const std::string text = format_double(v);
    CHECK(afc::detail::parse_double(text, "roundtrip") == v);
  }
}

TEST_CASE("timeseries header is bit-exact") {
  SimConfig cfg;
  cfg.t_end = 0.0;
  const auto records = run_closed_loop(cfg);
  std::ostringstream out;
  write_timeseries_csv(out, records, 0);
  CHECK(out.str() == "t,x,xdot,xd,xddot,u,upsilon,uhat,epsilon,dhat,dtrue\n");
  std::ostringstream with_outputs;
  write_timeseries_csv(with_outputs, records, 2);
  CHECK(with_outputs.str() ==
        "t,x,xdot,xd,xddot,u,upsilon,uhat,epsilon,dhat,dtrue,Dhat_1,Dhat_2\n");
}

TEST_CASE("csv round-trip reproduces the records field for field") {
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.log_dhat = true;
  const auto records = run_closed_loop(cfg);
  std::ostringstream out;
  write_timeseries_csv(out, records, cfg.centers.size());
  std::istringstream in(out.str());
  const auto parsed = read_timeseries_csv(in);
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    REQUIRE(parsed[i].t == records[i].t);
    REQUIRE(parsed[i].state == records[i].state);
    REQUIRE(parsed[i].reference == records[i].reference);
    REQUIRE(parsed[i].error == records[i].error);
    REQUIRE(parsed[i].u == records[i].u);
    REQUIRE(parsed[i].upsilon == records[i].upsilon);
    REQUIRE(parsed[i].uhat == records[i].uhat);
    REQUIRE(parsed[i].epsilon == records[i].epsilon);
    REQUIRE(parsed[i].dhat == records[i].dhat);
    REQUIRE(parsed[i].dtrue == records[i].dtrue);
    REQUIRE(parsed[i].rule_outputs == records[i].rule_outputs);
  }
}

TEST_CASE("csv reader rejects malformed input") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_timeseries_csv(empty), ConfigError);
  std::istringstream wrong_header("time,x\n");
  CHECK_THROWS_AS(read_timeseries_csv(wrong_header), ConfigError);
  std::istringstream short_row(
      "t,x,xdot,xd,xddot,u,upsilon,uhat,epsilon,dhat,dtrue\n1,2,3\n");
  CHECK_THROWS_AS(read_timeseries_csv(short_row), ConfigError);
  std::istringstream bad_value(
      "t,x,xdot,xd,xddot,u,upsilon,uhat,epsilon,dhat,dtrue\n0,0,0,0,1,x,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_timeseries_csv(bad_value), ConfigError);
}

TEST_CASE("manifest echo covers every config key") {
  const auto entries = afc::config_entries(SimConfig{});
  REQUIRE(entries.size() == 15);
  const std::vector<std::string> expected{
      "t_end", "plant_rate", "control_rate", "x0",     "mu",
      "b",     "m",          "delta_l",      "delta_r", "lambda",
      "kappa", "phi",        "centers",      "log_dhat", "seedless"};
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(entries[i].first == expected[i]);
}

TEST_CASE("sweep parameters are the documented subset") {
  SimConfig cfg;
  for (const std::string name : {"kappa", "phi", "lambda", "delta_l", "delta_r",
                                 "mu", "m", "b"})
    CHECK_NOTHROW(afc::set_sweep_parameter(cfg, name, 0.5));
  CHECK(cfg.kappa == 0.5);
  CHECK_THROWS_AS(afc::set_sweep_parameter(cfg, "t_end", 1.0), ConfigError);
  CHECK_THROWS_AS(afc::set_sweep_parameter(cfg, "nope", 1.0), ConfigError);
}
