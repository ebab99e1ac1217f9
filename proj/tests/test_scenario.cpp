#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "singlab/errors.hpp"
#include "singlab/report.hpp"
#include "singlab/scenario.hpp"

using namespace singlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kDiracConfig = R"({
  "name": "dirac-test",
  "domain": {"dim": 1, "resolution": 65},
  "gamma": 1.0,
  "scheme": "monotone",
  "measure": {"atoms": [{"point": [0.5], "weight": 1.0}]},
  "ladder": {"schedule": [10, 100]}
})";

}  // namespace

TEST_CASE("csv quoting follows RFC 4180") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_line({"a", "b,c", "1.5"}) == "a,\"b,c\",1.5");
}

TEST_CASE("numbers are written with 17 significant digits") {
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0 / 3.0) == "0.66666666666666663");
}

TEST_CASE("empty result set writes a headers-only csv") {
    std::string path = "headers_only_test.csv";
    write_csv(path, {"a", "b"}, {});
    CHECK(slurp(path) == "a,b\n");
    std::remove(path.c_str());
}

TEST_CASE("config parsing round-trips") {
    ScenarioConfig cfg = parse_scenario_text(kDiracConfig);
    CHECK(cfg.dim == 1);
    CHECK(cfg.resolution == 65);
    CHECK(cfg.gamma == 1.0);
    CHECK(cfg.schedule.size() == 2);
    std::string ser = serialize_scenario(cfg);
    ScenarioConfig cfg2 = parse_scenario_text(ser);
    CHECK(serialize_scenario(cfg2) == ser);  // idempotent after one round
}

TEST_CASE("unknown keys are rejected with their path") {
    const char* bad = R"({
      "domain": {"dim": 1, "resolution": 65, "fancy": 3},
      "gamma": 1.0,
      "measure": {"density": 1.0},
      "ladder": {"schedule": [10, 100]}
    })";
    try {
        parse_scenario_text(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("fancy") != std::string::npos);
    }
}

TEST_CASE("malformed gamma names the key") {
    const char* bad = R"({
      "domain": {"dim": 1, "resolution": 65},
      "gamma": -1.0,
      "measure": {"density": 1.0},
      "ladder": {"schedule": [10, 100]}
    })";
    try {
        parse_scenario_text(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("gamma") != std::string::npos);
    }
}

TEST_CASE("json syntax errors are configuration errors") {
    CHECK_THROWS_AS(parse_scenario_text("{ not json"), ConfigError);
}

TEST_CASE("a scenario needs a measure or a capacity block") {
    const char* bare = R"({"domain": {"dim": 1, "resolution": 65}})";
    CHECK_THROWS_AS(parse_scenario_text(bare), ConfigError);
}

TEST_CASE("geometric schedules expand correctly") {
    const char* cfg_text = R"({
      "domain": {"dim": 1, "resolution": 65},
      "measure": {"density": 1.0},
      "ladder": {"geometric": {"n0": 10, "factor": 10, "count": 4}}
    })";
    ScenarioConfig cfg = parse_scenario_text(cfg_text);
    REQUIRE(cfg.schedule.size() == 4);
    CHECK(cfg.schedule[0] == 10.0);
    CHECK(cfg.schedule[3] == 10000.0);
}

TEST_CASE("run_scenario writes deterministic artifacts") {
    ScenarioConfig cfg = parse_scenario_text(kDiracConfig);
    ScenarioOutcome a = run_scenario(cfg, "scenario_out_a");
    ScenarioOutcome b = run_scenario(cfg, "scenario_out_b");
    CHECK(a.status == 0);
    CHECK(b.status == 0);
    CHECK(slurp(a.levels_path) == slurp(b.levels_path));
    CHECK(slurp(a.summary_path) == slurp(b.summary_path));

    // two levels -> two data rows in schedule order
    std::stringstream ss(slurp(a.levels_path));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(ss, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].rfind("scheme,level_index,n,", 0) == 0);
    CHECK(lines[1].rfind("monotone,0,10,", 0) == 0);
    CHECK(lines[2].rfind("monotone,1,100,", 0) == 0);

    CHECK(a.summary_json.find("\"status\": \"ok\"") != std::string::npos);
}

TEST_CASE("both schemes produce the uniqueness block") {
    const char* cfg_text = R"({
      "name": "both-schemes",
      "domain": {"dim": 1, "resolution": 65},
      "gamma": 1.0,
      "scheme": "both",
      "measure": {"atoms": [{"point": [0.5], "weight": 1.0}]},
      "ladder": {"schedule": [10, 100, 1000]}
    })";
    ScenarioConfig cfg = parse_scenario_text(cfg_text);
    ScenarioOutcome out = run_scenario(cfg, "scenario_out_both");
    CHECK(out.status == 0);
    CHECK(out.summary_json.find("\"uniqueness\"") != std::string::npos);
    CHECK(out.summary_json.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("capacity-only scenario writes capacity.csv") {
    const char* cfg_text = R"({
      "name": "cap-only",
      "domain": {"dim": 2, "resolution": 65},
      "capacity": {"set": "point", "p": 2.0, "radii": [0.2, 0.1, 0.05]}
    })";
    ScenarioConfig cfg = parse_scenario_text(cfg_text);
    ScenarioOutcome out = run_scenario(cfg, "scenario_out_cap");
    CHECK(out.status == 0);
    std::string cap = slurp(out.capacity_path);
    CHECK(cap.rfind("r,p,estimate\n", 0) == 0);
    CHECK(out.summary_json.find("\"trend\": \"vanishing\"") != std::string::npos);
}

TEST_CASE("solver failure yields status 3 with partial artifacts") {
    const char* cfg_text = R"({
      "name": "stiff",
      "domain": {"dim": 1, "resolution": 65},
      "gamma": 2.0,
      "scheme": "monotone",
      "measure": {"atoms": [{"point": [0.5], "weight": 1.0}]},
      "ladder": {"schedule": [1, 1000000]},
      "solver": {"newton": false, "polish": false, "max_outer": 200}
    })";
    ScenarioConfig cfg = parse_scenario_text(cfg_text);
    ScenarioOutcome out = run_scenario(cfg, "scenario_out_stiff");
    CHECK(out.status == 3);
    CHECK(out.summary_json.find("\"status\": \"solver-failed\"") != std::string::npos);
    // the completed level is still in the artifacts
    std::string levels = slurp(out.levels_path);
    CHECK(levels.find("monotone,0,1,") != std::string::npos);
}

TEST_CASE("failed checks yield status 4 with complete artifacts") {
    const char* cfg_text = R"({
      "name": "impossible-uniqueness-tol",
      "domain": {"dim": 1, "resolution": 65},
      "gamma": 1.0,
      "scheme": "both",
      "measure": {"atoms": [{"point": [0.5], "weight": 1.0}]},
      "ladder": {"schedule": [10, 100, 1000]},
      "diagnostics": {"uniqueness_tol": 1e-16}
    })";
    ScenarioConfig cfg = parse_scenario_text(cfg_text);
    ScenarioOutcome out = run_scenario(cfg, "scenario_out_checks");
    CHECK(out.status == 4);
    CHECK(!out.check_failures.empty());
    CHECK(out.summary_json.find("\"status\": \"checks-failed\"") != std::string::npos);
    CHECK(slurp(out.levels_path).find("monotone,2,1000,") != std::string::npos);
}

TEST_CASE("validation suite passes") {
    std::stringstream log;
    int status = run_validation_suite(log);
    INFO(log.str());
    CHECK(status == 0);
}
