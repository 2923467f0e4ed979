#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>

#include "henon/experiment.hpp"
#include "henon/io.hpp"
#include "oracles.hpp"

using namespace henon;
namespace fs = std::filesystem;

TEST_CASE("map description round-trips bit-exactly") {
    std::vector<std::string> errors;
    const std::string text =
        R"({"factors":[{"a":[0.1,0.0],"coeffs":[[-6.0,0.0]]},)"
        R"({"a":[0.30000000000000004,-1e-17],"coeffs":[[0.1,0.2],[3.5e300,-2.2250738585072014e-308]]}]})";
    json doc = json::parse(text);
    auto factors = parse_map_factors(doc, "map", errors);
    REQUIRE(errors.empty());
    HenonMap m(factors);
    json out = serialize_map(m);
    std::vector<std::string> errors2;
    auto factors2 = parse_map_factors(out, "map", errors2);
    REQUIRE(errors2.empty());
    REQUIRE(factors2.size() == factors.size());
    for (size_t i = 0; i < factors.size(); ++i) {
        CHECK(factors2[i].a() == factors[i].a()); // bitwise equality through the round trip
        REQUIRE(factors2[i].coeffs().size() == factors[i].coeffs().size());
        for (size_t k = 0; k < factors[i].coeffs().size(); ++k)
            CHECK(factors2[i].coeffs()[k] == factors[i].coeffs()[k]);
    }
    // serialize is a fixed point after one pass
    HenonMap m2(factors2);
    CHECK(serialize_map(m2).dump() == out.dump());
}

TEST_CASE("fmt17 round-trips doubles") {
    auto rng = oracles::seeded_rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        double v = std::ldexp(u(rng), (i % 600) - 300);
        CHECK(std::stod(fmt17(v)) == v);
    }
}

TEST_CASE("toml subset parses the same document as json") {
    const std::string toml_text = R"(
# horseshoe experiment
[map]
factors = [ { a = [0.1, 0.0], coeffs = [[-6.0, 0.0]] } ]

[census]
n_max = 6
itineraries = true
newton_tol = 1e-12
)";
    const std::string json_text = R"({
      "map": {"factors": [{"a": [0.1, 0.0], "coeffs": [[-6.0, 0.0]]}]},
      "census": {"n_max": 6, "itineraries": true, "newton_tol": 1e-12}
    })";
    std::vector<std::string> errors;
    json a = parse_toml(toml_text, errors);
    REQUIRE(errors.empty());
    json b = json::parse(json_text);
    CHECK(a["map"] == b["map"]);
    CHECK(a["census"]["n_max"] == b["census"]["n_max"]);
    CHECK(a["census"]["itineraries"] == b["census"]["itineraries"]);
    CHECK(a["census"]["newton_tol"].get<double>() == b["census"]["newton_tol"].get<double>());

    // dotted headers open nested tables
    const std::string dotted = R"(
[shadow]
N_min = 4
[shadow.saddle]
period = 1
index = 1
)";
    std::vector<std::string> errs2;
    json d = parse_toml(dotted, errs2);
    REQUIRE(errs2.empty());
    CHECK(d["shadow"]["N_min"] == 4);
    CHECK(d["shadow"]["saddle"]["index"] == 1);
}

TEST_CASE("strict config parsing rejects bad input exhaustively") {
    // a = 0 and an unknown field, both reported
    json doc = json::parse(R"({
      "map": {"factors": [{"a": [0.0, 0.0], "coeffs": [[1.0, 0.0]]}]},
      "census": {"n_max": 3, "bogus_knob": 1},
      "mystery": 7
    })");
    std::vector<std::string> errors;
    parse_experiment_config(doc, "census", errors);
    REQUIRE(errors.size() >= 3);
    bool saw_a = false, saw_unknown = false, saw_top = false;
    for (const auto& e : errors) {
        if (e.find("nonzero") != std::string::npos) saw_a = true;
        if (e.find("bogus_knob") != std::string::npos) saw_unknown = true;
        if (e.find("mystery") != std::string::npos) saw_top = true;
    }
    CHECK(saw_a);
    CHECK(saw_unknown);
    CHECK(saw_top);
}

TEST_CASE("unknown subcommands are rejected") {
    json doc = json::parse(R"({"map":{"factors":[{"a":[0.5,0.0],"coeffs":[[0.0,0.0]]}]}})");
    std::vector<std::string> errors;
    parse_experiment_config(doc, "frobnicate", errors);
    bool saw = false;
    for (const auto& e : errors)
        if (e.find("unknown subcommand") != std::string::npos) saw = true;
    CHECK(saw);
}

TEST_CASE("feasibility warning for deep shadow runs") {
    json doc = json::parse(R"({
      "map": {"factors": [{"a": [0.1, 0.0], "coeffs": [[-6.0, 0.0]]}]},
      "shadow": {"N_min": 4, "N_max": 40}
    })");
    std::vector<std::string> errors;
    ExperimentConfig cfg = parse_experiment_config(doc, "shadow", errors);
    REQUIRE(errors.empty());
    auto warnings = feasibility_warnings(cfg);
    bool advised = false;
    for (const auto& w : warnings)
        if (w.find("extended") != std::string::npos) advised = true;
    CHECK(advised);
}

#ifdef HENONLAB_BIN
namespace {

std::string tmpdir() {
    static int counter = 0;
    std::string d = (fs::temp_directory_path() / ("henonlab_test_" + std::to_string(::getpid()) +
                                                  "_" + std::to_string(counter++)))
                        .string();
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(HENONLAB_BIN) + " " + args + " >/dev/null 2>/dev/null";
    return std::system(cmd.c_str());
}

} // namespace

TEST_CASE("cli: deterministic census reruns, exit codes, strict config") {
    std::string dir = tmpdir();
    std::string cfgpath = dir + "/hs.toml";
    write_file(cfgpath, std::string(R"([map]
factors = [ { a = [0.1, 0.0], coeffs = [[-6.0, 0.0]] } ]
[census]
n_max = 4
)"));
    REQUIRE(run_cli("census --config " + cfgpath + " --out " + dir + "/r1 --seed 5") == 0);
    REQUIRE(run_cli("census --config " + cfgpath + " --out " + dir + "/r2 --seed 5") == 0);
    CHECK(read_file(dir + "/r1/census.csv") == read_file(dir + "/r2/census.csv"));
    CHECK(read_file(dir + "/r1/orbits.json") == read_file(dir + "/r2/orbits.json"));
    // record determinism over everything but the volatile timestamps
    json a = json::parse(read_file(dir + "/r1/record.json"));
    json b = json::parse(read_file(dir + "/r2/record.json"));
    for (auto* j : {&a, &b}) {
        j->erase("started_utc");
        j->erase("finished_utc");
    }
    CHECK(a.dump() == b.dump());
    CHECK(a["status"] == "complete");
    CHECK(a["config_hash"] == b["config_hash"]);

    // bad config: nonzero exit, exhaustive messages
    std::string badpath = dir + "/bad.json";
    write_file(badpath, std::string(
        R"({"map":{"factors":[{"a":[0.0,0.0],"coeffs":[[1.0,0.0]]}]},"census":{"n_max":2},"junk":1})"));
    CHECK(run_cli("census --config " + badpath + " --out " + dir + "/rbad") != 0);
    CHECK(run_cli("validate --config " + cfgpath + " --for census") == 0);
    fs::remove_all(dir);
}

TEST_CASE("cli: render emits a well-formed ppm") {
    std::string dir = tmpdir();
    std::string cfgpath = dir + "/render.json";
    write_file(cfgpath, std::string(R"({
      "map": {"factors": [{"a": [0.5, 0.0], "coeffs": [[0.0, 0.0]]}]},
      "render": {"center": [0,0,0,0], "tangent": [1,0,0,0], "conormal": [0,0,1,0],
                 "radius": 2.5, "resolution": 64, "cap": 200}
    })"));
    REQUIRE(run_cli("render --config " + cfgpath + " --out " + dir + "/r") == 0);
    std::string ppm = read_file(dir + "/r/render.ppm");
    CHECK(ppm.substr(0, 3) == "P6\n");
    CHECK(ppm.size() == std::string("P6\n64 64\n255\n").size() + 3u * 64u * 64u);
    json rec = json::parse(read_file(dir + "/r/record.json"));
    CHECK(rec["results"]["bounded_cells"].get<long>() > 0); // the sink basin shows up
    fs::remove_all(dir);
}
#endif
