#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "anisolt/harness/config.hpp"
#include "anisolt/harness/experiments.hpp"
#include "anisolt/harness/run.hpp"
#include "doctest.h"
#include "json.hpp"
#include "small_configs.hpp"

using namespace anisolt::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("anisolt_test_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(parse_config("covering", "covering.bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("covering", "covering.trials = 1\ncovering.trials = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("covering", "covering.trials\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("covering", "covering.trials =   \n"), ConfigError);
  CHECK_THROWS_AS(parse_config("covering", "experiment = slnd\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("covering", "schema = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("nonsense", ""), ConfigError);
  const auto c = parse_config("covering", "# comment\nexperiment = covering\n  covering.trials = 7  # trailing\n\n");
  CHECK(c.integer("covering.trials") == 7);
  CHECK(c.int_list("covering.n") == std::vector<long>{50, 100, 200});
  CHECK(c.u64("run.seed") == 1);
  CHECK_THROWS_AS(c.str("no.such.key"), ConfigError);
  CHECK_THROWS_AS(parse_config("covering", "covering.trials = seven\n").integer("covering.trials"), ConfigError);
}

TEST_CASE("canonical text round-trips") {
  for (const auto& name : experiments()) {
    const auto c = parse_config(name, "");
    const auto again = parse_config(name, c.canonical());
    CHECK(again.values() == c.values());
    CHECK(again.canonical() == c.canonical());
    CHECK(c.values().size() == schema(name).size());
    for (const auto& k : schema(name)) CHECK(describe_schema(name).find(k.key) != std::string::npos);
  }
}

TEST_CASE("csv_number") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> U(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::pow(10.0, U(gen)) * (i % 2 ? 1 : -1);
    CHECK(std::stod(csv_number(v)) == v);
  }
  CHECK(csv_number(0.5) == "0.5");
  CHECK(csv_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(csv_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("one-dimensional covering never exceeds two") {
  const auto c = parse_config("covering", "geometry.H = 0.5\ncovering.n = 10,30\ncovering.trials = 1000\n");
  const auto r = run_experiment(c);
  CHECK(r.summary.at("max_count").get<long>() == 2);
  CHECK(r.flags.empty());
}

TEST_CASE("white-noise heat equation variance") {
  const auto r = run_experiment(parse_config("she-verify", ""));
  const double v = r.summary.at("variance").get<double>();
  CHECK(v == doctest::Approx(1.0 / std::sqrt(2.0 * std::acos(-1.0))).epsilon(1e-6));
  CHECK(r.summary.at("quadrature_rel_error").get<double>() < 1e-6);
}

TEST_CASE("bad model parameters are configuration errors") {
  CHECK_THROWS_AS(run_experiment(parse_config("localtime", "model.H = 1.5\n")), ConfigError);
  CHECK_THROWS_AS(run_experiment(parse_config("covering", "covering.trials = 0\n")), ConfigError);
}

TEST_CASE("run and replay") {
  for (const auto& [name, text] : small_configs()) {
    CAPTURE(name);
    const fs::path dir = scratch(name);
    std::ostringstream log;
    const int code = run(parse_config(name, text), dir, log);
    CHECK((code == exit_ok || code == exit_flagged));
    const fs::path manifest = dir / "manifest.json";
    REQUIRE(fs::exists(manifest));
    const auto m = nlohmann::json::parse(std::ifstream(manifest));
    CHECK(m.at("experiment") == name);
    CHECK(m.at("status") == (code == exit_ok ? "ok" : "flagged"));
    for (const auto& a : m.at("artifacts")) {
      CHECK(fs::file_size(dir / a.at("file").get<std::string>()) == a.at("bytes").get<std::size_t>());
    }
    for (unsigned threads : {1u, 4u}) {
      const auto rep = replay(manifest, threads);
      CHECK(rep.identical);
      CHECK(rep.compared.size() == m.at("artifacts").size());
    }
    if (name != "she-verify") {  // deterministic, no random draws
      const auto other = replay(manifest, std::nullopt, 12345);
      CHECK_FALSE(other.identical);
    }
    fs::remove_all(dir);
  }
  CHECK_THROWS(replay(scratch("missing") / "manifest.json"));
}

TEST_CASE("tampered artifacts are detected") {
  const fs::path dir = scratch("tamper");
  std::ostringstream log;
  run(parse_config("slnd", "slnd.configs = 10\n"), dir, log);
  std::ofstream(dir / "slnd_configs.csv", std::ios::app) << "extra\n";
  const auto rep = replay(dir / "manifest.json");
  CHECK_FALSE(rep.identical);
  REQUIRE(rep.differing.size() == 1);
  CHECK(rep.differing.front() == "slnd_configs.csv");
  fs::remove(dir / "slnd_configs.csv");
  CHECK_THROWS(replay(dir / "manifest.json"));
  fs::remove_all(dir);
}
