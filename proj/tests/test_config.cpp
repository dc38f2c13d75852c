#include <catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "critgrowth/commands.hpp"
#include "critgrowth/config.hpp"
#include "critgrowth/errors.hpp"

using namespace critgrowth;
using nlohmann::json;

namespace {

std::string config_path(const std::string& name) {
  return std::string(CRITGROWTH_CONFIG_DIR) + "/" + name + ".json";
}

json minimal_gwi() {
  return json::parse(R"({
    "model": {
      "kind": "gwi",
      "offspring": [
        [{"vector": [0, 0], "prob": 0.4}, {"vector": [1, 0], "prob": 0.1},
         {"vector": [0, 1], "prob": 0.3}, {"vector": [1, 2], "prob": 0.2}],
        [{"vector": [0, 0], "prob": 0.6}, {"vector": [1, 0], "prob": 0.2},
         {"vector": [2, 2], "prob": 0.2}]
      ],
      "immigration": [{"vector": [0, 0], "prob": 0.8}, {"vector": [1, 0], "prob": 0.1},
                      {"vector": [0, 1], "prob": 0.1}]
    },
    "simulation": {"horizon": 100, "n_traj": 10, "seed": 3}
  })");
}

// Runs `fn` and returns the ConfigError it raises.
template <class F>
ConfigError config_error(F&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError");
  throw;
}

}  // namespace

TEST_CASE("shipped configs load and round-trip", "[config]") {
  for (const char* name : {"gwi_recurrent", "gwi_transient", "cell_division_extinct",
                           "cell_division_survive", "sdgw_mixture"}) {
    INFO(name);
    const auto cfg = parse_config(config_path(name));
    const auto again = config_from_json(to_json(cfg));
    CHECK(again == cfg);
    CHECK(to_json(again) == to_json(cfg));
    CHECK_NOTHROW(build_model(cfg));
  }
}

TEST_CASE("invalid PMF names its path", "[config]") {
  auto j = minimal_gwi();
  j["model"]["offspring"][1][0]["prob"] = 0.58;  // sums to 0.98
  const auto e = config_error([&] { config_from_json(j); });
  CHECK(e.path() == "model.offspring[1]");
  CHECK(e.exit_code() == 1);
  CHECK(std::string(e.what()).find("0.98") != std::string::npos);
}

TEST_CASE("non-primitive mean matrix is rejected", "[config]") {
  const auto j = json::parse(R"({
    "model": {
      "kind": "gwi",
      "offspring": [[{"vector": [0, 1], "prob": 1}], [{"vector": [1, 0], "prob": 1}]],
      "immigration": [{"vector": [0, 0], "prob": 1}]
    }
  })");
  const auto e = config_error([&] { config_from_json(j); });
  const std::string msg = e.what();
  CHECK(msg.find("not primitive") != std::string::npos);
  CHECK(msg.find("[[0, 1], [1, 0]]") != std::string::npos);
}

TEST_CASE("schema errors name the key", "[config]") {
  auto j = minimal_gwi();
  j["simulation"]["horizonn"] = 5;
  CHECK(config_error([&] { config_from_json(j); }).path() == "simulation.horizonn");

  j = minimal_gwi();
  j["simulation"]["n_traj"] = "many";
  CHECK(config_error([&] { config_from_json(j); }).path() == "simulation.n_traj");

  j = minimal_gwi();
  j["simulation"]["n_traj"] = 0;
  const auto e = config_error([&] { config_from_json(j); });
  CHECK(e.path() == "simulation.n_traj");
  CHECK(exit_code_for(e) == 1);

  j = minimal_gwi();
  j["model"]["kind"] = "hawkes";
  CHECK(config_error([&] { config_from_json(j); }).path() == "model.kind");

  j = minimal_gwi();
  j["output"] = {{"format", "xml"}};
  CHECK(config_error([&] { config_from_json(j); }).path() == "output.format");

  j = minimal_gwi();
  j["simulation"]["x0"] = {1, 2, 3};
  CHECK(config_error([&] { config_from_json(j); }).path() == "simulation.x0");

  CHECK_THROWS_AS(parse_config(config_path("does_not_exist")), ConfigError);
}

TEST_CASE("standing assumptions are enforced at load time", "[config]") {
  auto j = minimal_gwi();
  j["model"]["immigration"] = json::parse(R"([{"vector": [1, 0], "prob": 1}])");
  CHECK(config_error([&] { config_from_json(j); }).path() == "model");
}

TEST_CASE("error JSON shape", "[config]") {
  const ConfigError ce("simulation.n_traj", "must be a positive integer");
  const auto body = error_json(ce);
  REQUIRE(body.contains("error"));
  CHECK(body["error"]["exit_code"] == 1);
  CHECK(body["error"]["kind"] == "config");
  CHECK(body["error"]["path"] == "simulation.n_traj");
  CHECK(body["error"]["message"].get<std::string>().find("positive") != std::string::npos);

  const DegenerateVarianceError dv("sigma^2 = 0");
  CHECK(error_json(dv)["error"]["exit_code"] == 2);
  CHECK(exit_code_for(std::runtime_error("x")) == 2);
}

TEST_CASE("analyze report for the recurrent GWI", "[config]") {
  auto cfg = parse_config(config_path("gwi_recurrent"));
  const auto out = cmd_analyze(cfg);
  const auto& r = out.report;
  CHECK(r["command"] == "analyze");
  CHECK(r["criticality"] == "Critical");
  const double s2 = std::sqrt(2.0);
  CHECK(std::abs(r["criterion"]["gwi"]["two_au"].get<double>() - 0.2 * s2) < 1e-12);
  CHECK(std::abs(r["criterion"]["gwi"]["uVu"].get<double>() - 12.0 * s2 / 13.0) < 1e-12);
  CHECK(r["criterion"]["gwi"]["verdict"] == "Recurrent");
  CHECK(r["criterion"]["classification"] == "BoundedAS");
  CHECK(std::abs(r["contraction_factor"].get<double>() - 0.3) < 1e-9);
  CHECK(dump_report(r) == dump_report(cmd_analyze(cfg).report));
}

TEST_CASE("simulate report is byte-identical across runs", "[config]") {
  auto cfg = parse_config(config_path("cell_division_survive"));
  cfg.simulation.horizon = 200;
  cfg.simulation.n_traj = 50;
  const auto a = cmd_simulate(cfg);
  const auto b = cmd_simulate(cfg);
  CHECK(dump_report(a.report) == dump_report(b.report));
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(a.tables[i] == b.tables[i]);
  cfg.simulation.seed += 1;
  CHECK(dump_report(cmd_simulate(cfg).report) != dump_report(a.report));
}
