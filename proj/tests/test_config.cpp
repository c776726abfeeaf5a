#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacbound/config.hpp"

using namespace pacb;

static const char* kSample = R"(
# experiment settings
run.name = demo
train.epochs = 12
train.lr = 0.05
train.momentum=0.9   # trailing comment
flags.verbose = true
flags.strict = off
grid.values = 1e-3, 1e-2, 0.1
loss.matrix = 0, 1; 1, 0; 0.5, 0.2
)";

TEST_CASE("parsing and typed getters") {
  Config cfg = Config::from_string(kSample);

  CHECK(cfg.has("run.name"));
  CHECK_FALSE(cfg.has("run.missing"));

  CHECK(cfg.get_string("run.name", "x") == "demo");
  CHECK(cfg.get_int("train.epochs", 0) == 12);
  CHECK(cfg.get_double("train.lr", 0.0) == doctest::Approx(0.05));
  CHECK(cfg.get_double("train.momentum", 0.0) == doctest::Approx(0.9));
  CHECK(cfg.get_bool("flags.verbose", false));
  CHECK_FALSE(cfg.get_bool("flags.strict", true));

  std::vector<double> grid = cfg.get_doubles("grid.values", {});
  REQUIRE(grid.size() == 3);
  CHECK(grid[0] == doctest::Approx(1e-3));
  CHECK(grid[2] == doctest::Approx(0.1));

  std::vector<std::vector<double>> mat = cfg.get_matrix("loss.matrix", {});
  REQUIRE(mat.size() == 3);
  REQUIRE(mat[2].size() == 2);
  CHECK(mat[0][1] == doctest::Approx(1.0));
  CHECK(mat[2][0] == doctest::Approx(0.5));
  CHECK(mat[2][1] == doctest::Approx(0.2));
}

TEST_CASE("defaults are applied and recorded") {
  Config cfg = Config::from_string("a.x = 1\n");
  CHECK(cfg.get_int("a.x", 7) == 1);
  CHECK(cfg.get_double("a.missing", 2.5) == doctest::Approx(2.5));
  CHECK(cfg.get_string("a.name", "fallback") == "fallback");
  CHECK(cfg.get_bool("a.flag", true));

  const auto& seen = cfg.resolved();
  REQUIRE(seen.count("a.x") == 1);
  REQUIRE(seen.count("a.missing") == 1);
  REQUIRE(seen.count("a.name") == 1);
  REQUIRE(seen.count("a.flag") == 1);
  CHECK(seen.at("a.x") == "1");
  CHECK(seen.at("a.name") == "fallback");

  nlohmann::json j = cfg.resolved_json();
  CHECK(j.contains("a.missing"));
  CHECK(j["a.name"] == "fallback");
}

TEST_CASE("overrides replace file values") {
  Config cfg = Config::from_string("train.lr = 0.1\n");
  cfg.set("train.lr", "0.01");
  cfg.set("extra.key", "42");
  CHECK(cfg.get_double("train.lr", 0.0) == doctest::Approx(0.01));
  CHECK(cfg.get_int("extra.key", 0) == 42);
}

TEST_CASE("parse errors identify the offending input") {
  // missing '=' names the line number
  CHECK_THROWS_WITH_AS(Config::from_string("a.x = 1\nnot a pair\n"),
                       doctest::Contains("line 2"), std::invalid_argument);

  Config cfg = Config::from_string(
      "a.num = abc\na.int = 1.5\na.bool = maybe\na.list = 1,,2\n");
  CHECK_THROWS_WITH_AS(cfg.get_double("a.num", 0.0),
                       doctest::Contains("a.num"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.get_int("a.int", 0), doctest::Contains("a.int"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.get_bool("a.bool", false),
                       doctest::Contains("a.bool"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.get_doubles("a.list", {}),
                       doctest::Contains("a.list"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.require_string("a.gone"),
                       doctest::Contains("a.gone"), std::invalid_argument);
}

TEST_CASE("file round trip") {
  const std::string path = "config_tmp_test.cfg";
  {
    std::ofstream out(path);
    out << "io.check = 3.25\nio.tag = hello\n";
  }
  Config cfg = Config::from_file(path);
  CHECK(cfg.get_double("io.check", 0.0) == doctest::Approx(3.25));
  CHECK(cfg.require_string("io.tag") == "hello");
  std::remove(path.c_str());

  CHECK_THROWS_AS(Config::from_file("definitely_missing_file.cfg"),
                  std::runtime_error);
}
