/*
 * Copyright 2026 The spectragap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spectragap/form.hpp"
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "spectragap/error.hpp"
#include "spectragap/pipeline.hpp"

using namespace spectragap;
namespace fs = std::filesystem;

namespace {

Json line_config(int n) { return Json{{"grid", {{"dim", 1}, {"n", n}}}}; }

RunOutcome run(const std::string& cmd, const Json& cfg, std::vector<std::string> ov = {}) {
    return run_command(cmd, cfg, ov, fs::temp_directory_path());
}

ErrorKind kind_of(const Json& cfg) {
    try {
        parse_config(cfg, fs::temp_directory_path());
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Internal;
}

std::string message_of(const Json& cfg) {
    try {
        parse_config(cfg, fs::temp_directory_path());
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

Json strip_clock(Json r) {
    r.erase("wall_clock_seconds");
    return r;
}

}  // namespace

TEST_CASE("defaults fill the resolved config") {
    const RunConfig c = parse_config(Json::object(), fs::temp_directory_path());
    CHECK(c.grid.dim() == 1);
    CHECK(c.grid.n(0) == 63);
    CHECK(c.resolved["eigen"]["tol"] == 1e-8);
    CHECK(c.resolved["classify"]["levels"] == 3);
    CHECK(c.resolved["potential"]["variant"] == "constant");
    CHECK(c.resolved["export"]["format"].is_null());
    // resolved config parses to itself
    const RunConfig again = parse_config(c.resolved, fs::temp_directory_path());
    CHECK(again.resolved == c.resolved);
}

TEST_CASE("schema violations name the key path") {
    CHECK(message_of(Json{{"grid", {{"dimm", 2}}}}).find("grid.dimm") != std::string::npos);
    CHECK(message_of(Json{{"eigen", {{"tol", "small"}}}}).find("eigen.tol") != std::string::npos);
    CHECK(message_of(Json{{"potential", {{"variant", "hardy"}, {"c", true}}}}).find("potential.c") !=
          std::string::npos);
    const Json poles = Json::parse(R"({"potential": {"variant": "multipolar", "poles": [{"a": 1}, {"a": "x"}]}})");
    CHECK(message_of(poles).find("potential.poles[1].a") != std::string::npos);
    CHECK(message_of(Json{{"grid", {{"dim", 4}}}}).find("grid.dim") != std::string::npos);
    CHECK(message_of(Json{{"classify", {{"levels", 2}}}}).find("classify.levels") != std::string::npos);
    CHECK(message_of(Json{{"shift_mode", "sometimes"}}).find("shift_mode") != std::string::npos);
    CHECK(kind_of(Json{{"bogus", 1}}) == ErrorKind::Config);
    CHECK(kind_of(Json::array()) == ErrorKind::Config);
}

TEST_CASE("missing data files are io errors") {
    const Json cfg = Json::parse(R"({"potential": {"variant": "from_ground", "u": "no_such_u.txt", "f": "no_such_f.txt"}})");
    CHECK(kind_of(cfg) == ErrorKind::Io);
}

TEST_CASE("overrides use dotted keys and last wins") {
    Json cfg = line_config(31);
    apply_override(cfg, "grid.n=127");
    apply_override(cfg, "potential.variant=hardy");
    apply_override(cfg, "potential.c=0.1");
    apply_override(cfg, "potential.c=0.2");
    apply_override(cfg, "classify.K={\"kind\": \"box\", \"sides\": [[0.25, 0.75]]}");
    CHECK(cfg["grid"]["n"] == 127);
    CHECK(cfg["potential"]["variant"] == "hardy");
    CHECK(cfg["potential"]["c"] == 0.2);
    CHECK(cfg["classify"]["K"]["sides"][0][1] == 0.75);
    CHECK_THROWS_AS(apply_override(cfg, "novalue"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "grid.n.x=1"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "a..b=1"), Error);
}

TEST_CASE("floats are written with 17 significant digits") {
    Json j = Json::object();
    j["a"] = 0.1;
    j["b"] = 1.0;
    j["c"] = std::numbers::pi;
    j["d"] = std::numeric_limits<double>::infinity();
    j["e"] = 3;
    j["v"] = {1.5, 2};
    const std::string s = dump_json(j, 0);
    CHECK(s == "{\"a\":0.10000000000000001,\"b\":1.0,\"c\":3.1415926535897931,\"d\":\"inf\",\"e\":3,\"v\":[1.5,2]}\n");
    // round trip
    const Json back = Json::parse(s);
    CHECK(back["a"].get<double>() == 0.1);
    CHECK(back["c"].get<double>() == std::numbers::pi);
    // key order follows insertion
    Json k = Json::object();
    k["z"] = 1;
    k["a"] = 2;
    CHECK(dump_json(k, 0) == "{\"z\":1,\"a\":2}\n");
}

TEST_CASE("eigen report on the unit interval") {
    const RunOutcome r = run("eigen", line_config(255));
    REQUIRE(r.exit_code == 0);
    const double v = r.report["result"]["value"].get<double>();
    CHECK(std::abs(v - std::numbers::pi * std::numbers::pi) <= 1e-3 * std::numbers::pi * std::numbers::pi);
    CHECK(r.report["status"] == "ok");
    CHECK(r.report["tool"]["name"] == "spectragap");
    CHECK(r.report["config"]["grid"]["n"][0] == 255);
    CHECK(r.report["wall_clock_seconds"].get<double>() >= 0.0);
    std::vector<std::string> keys;
    for (auto it = r.report.begin(); it != r.report.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"schema_version", "tool", "command", "status", "error", "config", "result",
                                           "tolerances", "history", "export", "environment", "wall_clock_seconds"});
}

TEST_CASE("exit codes partition outcomes") {
    CHECK(run("eigen", line_config(31)).exit_code == 0);
    CHECK(run("frobnicate", line_config(31)).exit_code == 1);
    CHECK(run("eigen", Json{{"grid", {{"n", -3}}}}).exit_code == 1);
    CHECK(run("eigen", line_config(31), {"eigen.max_iterations=0"}).exit_code == 1);
    // a budget of one iteration cannot converge: numerical failure, report still complete
    const RunOutcome nf = run("eigen", line_config(255), {"eigen.max_iterations=1", "eigen.preconditioner=jacobi"});
    CHECK(nf.exit_code == 2);
    CHECK(nf.report["status"] == "numerical_failure");
    CHECK(nf.report["result"].is_object());
    // indefinite form in the supersolution construction
    const RunOutcome ind = run("aap", line_config(63), {"potential.c=-20"});
    CHECK(ind.exit_code == 2);
    // missing config file
    const RunOutcome missing = run_command_file("eigen", "/nonexistent/spectragap.json", {});
    CHECK(missing.exit_code == 1);
    CHECK(missing.report["status"] == "config_error");
    CHECK(!missing.diagnostic.empty());
}

TEST_CASE("classify reports are reproducible from the embedded config") {
    Json cfg = Json::parse(R"({"grid": {"dim": 1, "n": 31}, "shift_mode": "discrete_principal",
                               "classify": {"K": {"kind": "box", "sides": [[0.3333333333333333, 0.6666666666666666]]}}})");
    const RunOutcome a = run("classify", cfg);
    REQUIRE(a.exit_code == 0);
    CHECK(a.report["result"]["tag"] == "Critical");
    CHECK(a.report["result"]["witness"].is_null());
    CHECK(a.report["history"].size() == 3);
    for (const auto& n : a.report["result"]["null_sequence"]["normalization"])
        CHECK(std::abs(n.get<double>() - 1.0) <= 1e-12);
    const RunOutcome b = run("classify", a.report["config"]);
    REQUIRE(b.exit_code == 0);
    CHECK(dump_json(strip_clock(a.report)) == dump_json(strip_clock(b.report)));
}

TEST_CASE("classify verdict in the report") {
    const Json cfg = Json::parse(R"({"grid": {"dim": 1, "n": 31},
                                     "classify": {"K": {"kind": "box", "sides": [[0.3333333333333333, 0.6666666666666666]]}}})");
    const RunOutcome r = run("classify", cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(r.report["result"]["tag"] == "Subcritical");
    const RunOutcome s = run("classify", cfg, {"potential.c=-30"});
    REQUIRE(s.exit_code == 0);
    CHECK(s.report["result"]["tag"] == "Supercritical");
    CHECK(s.report["result"]["witness"]["qv"].get<double>() < 0.0);
}

TEST_CASE("exports") {
    const fs::path dir = fs::temp_directory_path() / "spectragap_pipeline_test";
    fs::create_directories(dir);
    Json cfg = line_config(63);
    cfg["export"] = {{"format", "grid-text"}, {"path", (dir / "gs.txt").string()}};
    REQUIRE(run("eigen", cfg).exit_code == 0);
    const GridFunction g = read_grid_text(dir / "gs.txt");
    CHECK(g.size() == 63);

    cfg["export"] = {{"format", "csv-profile"}, {"path", (dir / "gs.csv").string()}};
    REQUIRE(run("eigen", cfg).exit_code == 0);
    std::ifstream is(dir / "gs.csv");
    std::string line;
    std::vector<double> vals;
    while (std::getline(is, line)) vals.push_back(std::stod(line.substr(line.find(',') + 1)));
    REQUIRE(vals.size() == 63);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        CHECK(std::abs(vals[i] - g.values[i]) <= 1e-15 * std::abs(g.values[i]) + 1e-300);
        CHECK(std::abs(vals[i] - vals[vals.size() - 1 - i]) <= 1e-10);
    }

    cfg["export"] = {{"format", "json"}, {"path", (dir / "r.json").string()}};
    const RunOutcome r = run("eigen", cfg);
    REQUIRE(r.exit_code == 0);
    std::ifstream rs(dir / "r.json");
    std::stringstream ss;
    ss << rs.rdbuf();
    CHECK(Json::parse(ss.str())["result"]["value"] == r.report["result"]["value"]);

    // identical inputs give byte-identical files
    cfg["export"] = {{"format", "grid-text"}, {"path", (dir / "gs2.txt").string()}};
    REQUIRE(run("eigen", cfg).exit_code == 0);
    std::ifstream a(dir / "gs.txt"), b(dir / "gs2.txt");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());

    cfg["export"] = {{"format", "grid-text"}, {"path", (dir / "x.txt").string()}};
    CHECK(run("probe", cfg).exit_code == 1);
    fs::remove_all(dir);
}

TEST_CASE("capacity, improve and probe commands") {
    const Json cap = Json::parse(R"({"grid": {"dim": 1, "n": 255},
                                     "capacity": {"K": {"kind": "box", "sides": [[0.3333333333333333, 0.6666666666666666]]}}})");
    const RunOutcome c = run("capacity", cap);
    REQUIRE(c.exit_code == 0);
    CHECK(std::abs(c.report["result"]["value"].get<double>() - 6.0) <= 6.0 * 2.0 / 256.0);

    Json mz = cap;
    mz["potential"] = {{"variant", "constant"}, {"c", -1.0}};
    mz["capacity"]["mazya"] = true;
    const RunOutcome m = run("capacity", mz);
    REQUIRE(m.exit_code == 0);
    CHECK(m.report["history"].size() == m.report["result"]["mazya"]["family_size"].get<std::size_t>());
    CHECK(run("capacity", mz, {"potential.c=1"}).exit_code == 1);

    const RunOutcome im = run("improve", line_config(63));
    REQUIRE(im.exit_code == 0);
    CHECK(im.report["result"]["improves"] == true);

    const RunOutcome osc = run("probe", Json{{"probe", {{"kind", "oscillation"}}}});
    REQUIRE(osc.exit_code == 0);
    CHECK(osc.report["result"]["divergent"] == true);
    CHECK(osc.report["result"]["fitted_slope"].get<double>() > 0.1);

    const RunOutcome bal = run("probe", Json{{"potential", {{"c", 1.0}}}, {"probe", {{"kind", "balance"}}}});
    REQUIRE(bal.exit_code == 0);
    CHECK(bal.report["result"]["verdict"] == "plausibly_balanced");
    CHECK(run("probe", Json{{"probe", {{"kind", "balance"}}}}).exit_code == 1);
}
