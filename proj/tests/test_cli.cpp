#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "effham/runner.hpp"

using namespace effham;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("effham_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config validation names the violation") {
    CHECK_THROWS_AS(ExperimentConfig::parse(json::array()), ConfigInvalid);
    CHECK_THROWS_AS(ExperimentConfig::parse(json{{"foo", 1}}), ConfigInvalid);
    CHECK_THROWS_AS(ExperimentConfig::parse(json{{"experiment", "nope"}}), ConfigInvalid);
    CHECK_NOTHROW(ExperimentConfig::parse(json{{"experiment", "properties"}}));
    try {
        ExperimentConfig::parse(json{{"experiment", "nope"}});
    } catch (const ConfigInvalid& e) {
        CHECK(std::string(e.what()).find("nope") != std::string::npos);
    }
}

TEST_CASE("field files round-trip") {
    auto dir = temp_dir("field");
    auto H = presets::pendulum(1.0, presets::GridChoice{16, 17, -2, 2});
    write_field(dir / "f.csv", H);
    auto H2 = read_field(dir / "f.csv");
    CHECK(H2.qgrid().n_nodes() == 16);
    for (int iq = 0; iq < 16; ++iq)
        for (int ip = 0; ip < 17; ++ip)
            CHECK(H2.at(iq, ip) == doctest::Approx(H.at(iq, ip)).epsilon(1e-11));
    CHECK(H2.is_convex_in_p());
}

TEST_CASE("runner: backends experiment writes curves, plots and diffs") {
    auto dir = temp_dir("backends");
    json j{{"experiment", "backends"},
           {"preset", {{"name", "pendulum"}, {"amplitude", 1.0}}},
           {"grid", {{"nq", 128}}},
           {"pgrid", {{"min", -2}, {"max", 2}, {"n", 9}}},
           {"weakkam", {{"T", 25.0}}},
           {"backends", {"levelset", "weakkam"}}};
    auto cfg = ExperimentConfig::parse(j);
    auto res = run_experiment(cfg, dir);
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(dir / "hbar_levelset.csv"));
    CHECK(fs::exists(dir / "hbar_weakkam.csv"));
    CHECK(fs::exists(dir / "hbar.svg"));
    CHECK(fs::exists(dir / "manifest.json"));
    auto d = diff_curves(dir / "hbar_levelset.csv", dir / "hbar_weakkam.csv");
    CHECK(d.sup < 1.5e-2);
    // metadata carries the config hash
    auto meta = json::parse(slurp(dir / "hbar_levelset.json"));
    CHECK(meta["config_hash"] == cfg.hash());
    CHECK(std::string(meta["backend"]) == "levelset");
}

TEST_CASE("runner: identical configs reproduce identical payload bytes") {
    json j{{"experiment", "hk"},
           {"preset", {{"name", "pendulum"}}},
           {"pgrid", {{"min", -2}, {"max", 2}, {"n", 9}}},
           {"k_list", {1, 2}},
           {"minmax", {{"x_nodes", 32}, {"fiber_nodes", 17}, {"tau", 0.02}}},
           {"seed", 7}};
    auto cfg = ExperimentConfig::parse(j);
    auto d1 = temp_dir("det1");
    auto d2 = temp_dir("det2");
    run_experiment(cfg, d1);
    run_experiment(cfg, d2);
    for (const char* f : {"hk_1.csv", "hk_2.csv"}) CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK(slurp(d1 / "hk_1.csv") != slurp(d1 / "hk_2.csv"));
}

TEST_CASE("runner: properties experiment reports and sets the exit code") {
    auto dir = temp_dir("props");
    json j{{"experiment", "properties"}, {"seed", 7}};
    auto res = run_experiment(ExperimentConfig::parse(j), dir);
    CHECK(res.exit_code == 0);
    auto rep = json::parse(slurp(dir / "properties.json"));
    CHECK(rep.is_array());
    CHECK(rep.size() >= 7);
    for (const auto& r : rep) CHECK(r["pass"] == true);
}

TEST_CASE("diff: identical curves give zeros, schema mismatches throw") {
    auto dir = temp_dir("diff");
    EffectiveHamiltonian h;
    h.p = {0.0, 0.5, 1.0};
    h.values = {0.1, 0.2, 0.3};
    write_effective(dir / "a.csv", h, "x");
    write_effective(dir / "b.csv", h, "x");
    auto d = diff_curves(dir / "a.csv", dir / "b.csv");
    CHECK(d.sup == 0.0);
    CHECK(d.l1 == 0.0);
    EffectiveHamiltonian g = h;
    g.p = {0.0, 0.6, 1.0};
    write_effective(dir / "c.csv", g, "x");
    CHECK_THROWS_AS(diff_curves(dir / "a.csv", dir / "c.csv"), SchemaMismatch);
}

TEST_CASE("svg plots are self-contained documents") {
    SvgPlot plot("t", "x", "y");
    plot.add_curve("c", {0, 1, 2}, {0, 1, 0});
    auto s = plot.render();
    CHECK(s.find("<svg") == 0);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("polyline") != std::string::npos);
    CHECK(s.find("http://www.w3.org/2000/svg") != std::string::npos);
}

TEST_CASE("parallel map fills disjoint slots deterministically") {
    std::vector<int> out(64, -1);
    parallel_for(64, 4, [&](int i) { out[i] = i * i; });
    for (int i = 0; i < 64; ++i) CHECK(out[i] == i * i);
}
