#include "digisim/error.hpp"
#include "digisim/pipeline.hpp"
#include "json.hpp"

#include "doctest.h"

#include <fstream>
#include <sstream>

using namespace digisim;
using namespace digisim::pipeline;
using nlohmann::json;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("digisim_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunOptions quiet_into(const fs::path &out) {
    RunOptions o;
    o.output_dir = out;
    o.quiet = true;
    return o;
}

} // namespace

TEST_CASE("fnv1a hashing") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("subcommands map to stages") {
    CHECK(stages_for("all").size() == 7);
    CHECK(stages_for("gapfill") == std::vector<Stage>{Stage::Gapfill, Stage::Ipf});
    CHECK(stages_for("risk") == std::vector<Stage>{Stage::Risk});
    CHECK_THROWS_AS(stages_for("nope"), Error);
}

TEST_CASE("config validation") {
    const auto dir = scratch("config");
    write_fixture(dir);
    const auto cfg = load_config(dir / "config.json");
    CHECK(cfg.inputs.census == dir / "census.csv");
    CHECK(cfg.output_dir == dir / "out");
    CHECK(cfg.periods.size() == 4);

    auto text = json::parse(slurp(dir / "config.json"));
    auto bad = text;
    bad["surprise"] = 1;
    CHECK_THROWS_AS(parse_config(bad.dump(), dir), Error);
    bad = text;
    bad["genfarms_gap"] = 1.5;
    CHECK_THROWS_AS(parse_config(bad.dump(), dir), Error);
    bad = text;
    bad["inputs"]["census"] = "absent.csv";
    try {
        parse_config(bad.dump(), dir);
        FAIL("expected a config error");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
    bad = text;
    bad["risk"]["periods"] = json::array({json::array({1, 20}), json::array({10, 30})});
    CHECK_THROWS_AS(parse_config(bad.dump(), dir), Error);
    CHECK_THROWS_AS(parse_config("{not json", dir), Error);

    auto moved = text;
    moved["output_dir"] = "elsewhere";
    CHECK(parse_config(moved.dump(), dir).canonical == cfg.canonical);
}

TEST_CASE("atomic writes replace files without leftovers") {
    const auto dir = scratch("atomic");
    write_atomic(dir / "a.txt", "one");
    write_atomic(dir / "a.txt", "two");
    CHECK(slurp(dir / "a.txt") == "two");
    CHECK(!fs::exists(dir / "a.txt.tmp"));
}

TEST_CASE("parallel_for visits every index and rethrows") {
    std::vector<int> seen(50, 0);
    parallel_for(seen.size(), 4, [&](std::size_t i) { seen[i] += 1; });
    CHECK(std::count(seen.begin(), seen.end(), 1) == 50);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) {
                            throw Error(ErrorKind::Infeasible, "x");
                        }
                    }),
                    Error);
}

TEST_CASE("farm and assignment files round-trip") {
    std::vector<FarmRecord> farms(1);
    farms[0].id = "19001-cattle-0001";
    farms[0].county = "19001";
    farms[0].livestock = "cattle";
    farms[0].size_class = 2;
    farms[0].heads_by_subtype = {{"beef", 40}, {"milk", 9}};
    farms[0].cell = CellId{3, 4};
    auto back = parse_farms(write_farms(farms));
    REQUIRE(back.size() == 1);
    CHECK(back[0].heads_by_subtype == farms[0].heads_by_subtype);
    CHECK(write_farms(back) == write_farms(farms));
    apply_assignments(write_assignments(farms), back);
    CHECK(back[0].cell == CellId{3, 4});
}

TEST_CASE("end-to-end fixture run") {
    const auto dir = scratch("e2e");
    write_fixture(dir);
    const auto cfg = load_config(dir / "config.json");
    const auto out = dir / "out";
    REQUIRE(run("all", cfg, quiet_into(out)) == 0);

    const auto manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["stages_complete"].size() == 7);
    CHECK(manifest["config_hash"] == fnv1a_hex(cfg.canonical));
    for (const auto *f : {"census_filled.csv", "provenance.csv", "gapfill_report.csv", "farms.csv",
                          "genfarms_report.csv", "assignments.csv", "alignment_report.csv", "validation_report.json",
                          "match_distances.csv", "risk_surface.csv", "county_risk.csv", "risk_summary.json",
                          "risk_map.geojson"}) {
        CHECK_MESSAGE(fs::exists(out / f), f);
    }
    CHECK(!fs::exists(out / "errors.json"));
    for (const auto &e : fs::directory_iterator(out)) {
        CHECK(e.path().extension() != ".tmp");
    }

    const auto report = json::parse(slurp(out / "validation_report.json"));
    CHECK(report["census_alignment"]["max_percent"].get<double>() <= 1.0);

    const auto filled = slurp(out / "census_filled.csv");
    REQUIRE(run("gapfill", cfg, quiet_into(out)) == 0);
    CHECK(slurp(out / "census_filled.csv") == filled);
    CHECK(json::parse(slurp(out / "manifest.json"))["stages_complete"].size() == 7);
}

TEST_CASE("a stage without its prerequisites fails cleanly") {
    const auto dir = scratch("prereq");
    write_fixture(dir);
    const auto cfg = load_config(dir / "config.json");
    const auto out = dir / "out";
    CHECK(run("risk", cfg, quiet_into(out)) == 1);
    const auto errors = json::parse(slurp(out / "errors.json"));
    CHECK(errors.dump().find("MissingPrerequisite") != std::string::npos);
    CHECK(!fs::exists(out / "county_risk.csv"));
}
