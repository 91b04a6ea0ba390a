#include "cqed/errors.hpp"
#include "cqed/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cqed;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string &name) {
  const auto p = fs::temp_directory_path() / ("cqed_scenario_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioConfig make(const std::string &tag, json params, const fs::path &out) {
  ScenarioConfig c;
  c.scenario = tag;
  c.seed = 4;
  c.output_dir = out;
  c.params = std::move(params);
  return c;
}

std::vector<std::pair<std::string, json>> quick_scenarios() {
  return {
      {"stark-scan", {{"stark-scan", {{"points", 5}}}}},
      {"magic", json::object()},
      {"transmit", {{"transmit", {{"points", 5}, {"solver", "both"}}}}},
      {"staircase-levels", json::object()},
      {"staircase", {{"staircase", {{"duration_s", 0.5}, {"loss_times_s", {0.1, 0.2, 0.3}}}}}},
      {"lifetime", {{"lifetime", {{"delays_s", {0.0, 1.0, 2.0}}, {"triggers_per_delay", 100}}}}},
      {"repump", {{"repump", {{"duration_s", 0.2}}}}},
      {"heating-budget", {{"heating-budget", {{"raman_trajectories", 200}, {"raman_duration_s", 2.0}}}}},
  };
}

} // namespace

TEST_SUITE("scenario") {

TEST_CASE("every scenario is byte-identical under a repeated config and seed") {
  for (const auto &[tag, params] : quick_scenarios()) {
    CAPTURE(tag);
    const auto a = scratch(tag + "_a"), b = scratch(tag + "_b");
    const auto ra = run_scenario(make(tag, params, a));
    const auto rb = run_scenario(make(tag, params, b));
    REQUIRE(ra.files.size() == rb.files.size());
    CHECK(ra.config_hash == rb.config_hash);
    for (std::size_t k = 0; k < ra.files.size(); ++k) {
      CHECK(ra.files[k].filename() == rb.files[k].filename());
      CHECK(slurp(ra.files[k]) == slurp(rb.files[k]));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("outputs carry provenance") {
  const auto d = scratch("prov");
  const auto r = run_scenario(make("magic", json::object(), d));
  const std::string text = slurp(d / "magic.csv");
  CHECK(text.find("# generator: cqed") != std::string::npos);
  CHECK(text.find("# config_hash: " + r.config_hash) != std::string::npos);
  CHECK(text.find("# seed: 4") != std::string::npos);
  CHECK(fs::exists(d / "magic_config.json"));
  fs::remove_all(d);
}

TEST_CASE("the hash tracks seed and parameters, not the output directory") {
  const auto base = make("magic", json::object(), "x");
  auto moved = base;
  moved.output_dir = "y";
  CHECK(config_hash(base) == config_hash(moved));
  auto seeded = base;
  seeded.seed = 5;
  CHECK(config_hash(base) != config_hash(seeded));
  auto changed = base;
  changed.params = {{"magic", {{"bracket_nm", {926.0, 944.0}}}}};
  CHECK(config_hash(base) != config_hash(changed));
  // Explicit defaults hash like omitted ones.
  auto explicit_default = base;
  explicit_default.params = {{"magic", {{"bracket_nm", {925.0, 945.0}}}}};
  CHECK(config_hash(base) == config_hash(explicit_default));
}

TEST_CASE("config errors name the field and write nothing") {
  const auto d = scratch("bad");
  auto check_error = [&](const json &params, const std::string &needle, const std::string &tag) {
    CAPTURE(needle);
    try {
      run_scenario(make(tag, params, d));
      FAIL("expected ConfigError");
    } catch (const ConfigError &e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
    CHECK_FALSE(fs::exists(d));
  };
  check_error({{"magic", {{"bracket_nm", {945.0, 925.0}}}}}, "magic.bracket_nm", "magic");
  check_error({{"magic", {{"colour", 1}}}}, "magic.colour", "magic");
  check_error({{"fort", {{"depth_mk", -1.0}}}}, "fort.depth_mk", "repump");
  check_error({{"fort", json::object()}}, "fort", "magic"); // unused block
  check_error({{"transmit", {{"solver", "magic"}}}}, "transmit.solver", "transmit");
  check_error({{"cavity", {{"g0_mhz", "big"}}}}, "cavity.g0_mhz", "transmit");
  check_error({{"fit-lifetime", json::object()}}, "fit-lifetime.input", "fit-lifetime");
  check_error({{"staircase", {{"loss_times_s", {0.3, 0.2}}}}}, "staircase.loss_times_s", "staircase");
  CHECK_THROWS_AS(run_scenario(make("warp-drive", json::object(), d)), ConfigError);
}

TEST_CASE("a runtime failure leaves no partial output") {
  const auto d = scratch("runtime");
  CHECK_THROWS(run_scenario(make("magic", {{"magic", {{"bracket_nm", {940.0, 945.0}}}}}, d)));
  CHECK_FALSE(fs::exists(d));
}

TEST_CASE("JSON round trip") {
  const json j = {{"scenario", "repump"}, {"seed", 9}, {"output_dir", "o"},
                  {"repump", {{"duration_s", 0.3}}}};
  const auto c = ScenarioConfig::from_json(j);
  CHECK(c.scenario == "repump");
  CHECK(c.seed == 9);
  CHECK(c.params["repump"]["duration_s"] == 0.3);
  CHECK(ScenarioConfig::from_json(c.to_json()).to_json() == c.to_json());
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"seed", 1}}), ConfigError);
  CHECK_THROWS_AS(ScenarioConfig::from_json({{"scenario", "magic"}, {"seed", -3}}), ConfigError);
}

TEST_CASE("staircase round trip through a record file") {
  const auto d = scratch("stair");
  run_scenario(make("staircase", json::object(), d));
  REQUIRE(fs::exists(d / "staircase_record.csv"));
  const auto e = scratch("stair_in");
  const auto r = run_scenario(
      make("staircase", {{"staircase", {{"input", (d / "staircase_record.csv").string()}}}}, e));
  CHECK(slurp(e / "staircase_segments.csv").find("3") != std::string::npos);
  fs::remove_all(d);
  fs::remove_all(e);
}

TEST_CASE("fit-lifetime reads the lifetime output") {
  const auto d = scratch("life");
  run_scenario(make("lifetime", {{"lifetime", {{"triggers_per_delay", 100}}}}, d));
  const auto e = scratch("life_fit");
  CHECK_NOTHROW(run_scenario(
      make("fit-lifetime", {{"fit-lifetime", {{"input", (d / "survival.csv").string()}}}}, e)));
  CHECK(fs::exists(e / "lifetime_fit.csv"));
  fs::remove_all(d);
  fs::remove_all(e);
}

}
