#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "pdsde/error.hpp"
#include "pdsde/scenario.hpp"
#include "pdsde/tomlite.hpp"

using namespace pdsde;

namespace {

const std::string kSource = PDSDE_SOURCE_DIR;

std::string base(const std::string& grid = "t0 = 0.0\nT = 1.0\ndt = 0.25\nr0 = 0.5\n",
                 const std::string& b = "x[1](-0.25)") {
    return "[grid]\n" + grid + "[dims]\nd = 1\nm = 1\n[models]\nb = [\"" + b +
           "\"]\nsigma = [[\"0.5*x[1](0)\"]]\n[initial]\ntype = \"builtin\"\nkind = \"dirac\"\nxi = 1.0\neta = 2.0\n"
           "[sim]\nN = 8\nseed = 3\n";
}

std::string config_key(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

std::string config_message(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Tomlite, Values) {
    const auto j = tomlite::parse(
        "# header\n[a]\nx = 1\ny = -2.5e-3  # trailing\nz = \"q\\\"s\"\nw = true\n"
        "v = [1, 2.0,\n  [\"a\", \"b\"]]\n[b]\n");
    EXPECT_TRUE(j.at("a").at("x").is_number_integer());
    EXPECT_EQ(j.at("a").at("x"), 1);
    EXPECT_EQ(j.at("a").at("y"), -2.5e-3);
    EXPECT_EQ(j.at("a").at("z"), "q\"s");
    EXPECT_EQ(j.at("a").at("w"), true);
    EXPECT_EQ(j.at("a").at("v").size(), 3u);
    EXPECT_EQ(j.at("a").at("v")[2][1], "b");
    EXPECT_TRUE(j.at("b").empty());
}

TEST(Tomlite, Errors) {
    const char* bad[] = {"x = 1\n", "[a]\nx = 1\nx = 2\n", "[a]\n[a]\n", "[a]\nx.y = 1\n",
                         "[a]\nx = {y = 1}\n", "[a]\nx = \"open\n", "[a]\nx = [1, 2\n", "[a]\nx = \n"};
    for (const char* text : bad) EXPECT_THROW(tomlite::parse(text), ConfigError) << text;
    try {
        tomlite::parse("[a]\nx = 1\nx = 2\n");
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "line 3");
    }
}

TEST(Scenario, ParsesMinimal) {
    const ScenarioSpec s = parse_scenario(base());
    EXPECT_EQ(s.grid.lags(), 2u);
    EXPECT_EQ(s.sim.particles, 8u);
    EXPECT_EQ(s.sim.seed, 3u);
    EXPECT_EQ(s.replications, 1u);
    EXPECT_EQ(s.probes.seed, 3u);
    EXPECT_EQ(model_hash(s.model), model_hash(s.model_bar));
    EXPECT_TRUE(s.initial.order_supported());
    EXPECT_EQ(s.probes.time_points, (std::vector<double>{0.0, 1.0}));
    EXPECT_TRUE(s.resolved.contains("grid"));
    EXPECT_TRUE(s.resolved.contains("models"));
}

TEST(Scenario, MissingDtNamesKey) {
    EXPECT_EQ(config_key(base("t0 = 0.0\nT = 1.0\nr0 = 0.5\n")), "grid.dt");
}

TEST(Scenario, LagOffGrid) {
    const std::string msg = config_message(base("t0 = 0.0\nT = 1.0\ndt = 0.25\nr0 = 0.5\n", "x[1](-0.3)"));
    EXPECT_NE(msg.find("lag not on grid"), std::string::npos) << msg;
    EXPECT_EQ(config_key(base("t0 = 0.0\nT = 1.0\ndt = 0.25\nr0 = 0.5\n", "x[1](-0.3)")), "models.b[1]");
}

TEST(Scenario, UnknownKeysAndSections) {
    EXPECT_EQ(config_key(base() + "[sim2]\n"), "sim2");
    EXPECT_EQ(config_key(base("t0 = 0.0\nT = 1.0\ndt = 0.25\nr0 = 0.5\nTT = 2.0\n")), "grid.TT");
}

TEST(Scenario, Validation) {
    EXPECT_EQ(config_key(base("t0 = 0.0\nT = 1.0\ndt = -0.25\nr0 = 0.5\n")), "grid.dt");
    EXPECT_EQ(config_key(base("t0 = 0.0\nT = 1.1\ndt = 0.25\nr0 = 0.5\n")), "grid.T");
    EXPECT_EQ(config_key(base("t0 = 0.0\nT = 1.0\ndt = 0.25\nr0 = 0.5\n", "x[1](0")), "models.b[1]");
    EXPECT_EQ(config_key(base("t0 = 0.0\nT = 1.0\ndt = \"x\"\nr0 = 0.5\n")), "grid.dt");
    std::string text = base();
    text.replace(text.find("N = 8"), 5, "N = 0");
    EXPECT_EQ(config_key(text), "sim.N");
}

TEST(Scenario, RoundsDelayUp) {
    const ScenarioSpec s = parse_scenario(base("t0 = 0.0\nT = 1.0\ndt = 0.25\nr0 = 0.3\n", "x[1](0)"));
    EXPECT_DOUBLE_EQ(s.grid.r0(), 0.5);
    EXPECT_EQ(s.resolved.at("grid").at("r0_adjusted"), true);
}

TEST(Scenario, SplusMatchesFixtureHashes) {
    const ScenarioSpec s = load_scenario(kSource + "/scenarios/s_plus.toml");
    const Json fixture = parse_json_text(read_file(kSource + "/tests/fixtures/s_plus_hashes.json"));
    EXPECT_EQ(s.resolved.at("models").at("system").at("hash"), fixture.at("model_hash"));
    EXPECT_EQ(s.resolved.at("initial").at("hash"), fixture.at("initial_hash"));
    EXPECT_EQ(s.initial.size(), 64u);
    EXPECT_EQ(s.replications, 64u);
}

TEST(Scenario, ShippedScenariosLoad) {
    for (const char* name : {"s_plus", "s_minus", "necessity"}) {
        EXPECT_NO_THROW(load_scenario(kSource + "/scenarios/" + name + ".toml")) << name;
    }
    const ScenarioSpec minus = load_scenario(kSource + "/scenarios/s_minus.toml");
    EXPECT_NE(model_hash(minus.model), model_hash(minus.model_bar));
    const ScenarioSpec nec = load_scenario(kSource + "/scenarios/necessity.toml");
    ASSERT_TRUE(nec.tag.has_value());
    EXPECT_EQ(nec.tag->eps, 0.9);
}

TEST(Scenario, LoadMissingFile) { EXPECT_THROW(load_scenario(kSource + "/scenarios/nope.toml"), IoError); }

TEST(Scenario, OverrideSeed) {
    ScenarioSpec s = parse_scenario(base());
    override_seed(s, 99);
    EXPECT_EQ(s.sim.seed, 99u);
    EXPECT_EQ(s.probes.seed, 99u);
    EXPECT_EQ(s.resolved.at("sim").at("seed"), 99);

    ScenarioSpec pinned = parse_scenario(base() + "[probes]\nseed = 5\n");
    override_seed(pinned, 99);
    EXPECT_EQ(pinned.probes.seed, 5u);
}

TEST(Scenario, DiagonalBuiltinStartsOnDiagonal) {
    std::string text = base();
    const std::string init = "kind = \"dirac\"\nxi = 1.0\neta = 2.0\n";
    text.replace(text.find(init), init.size(), "kind = \"diagonal\"\natoms = 5\n");
    const ScenarioSpec s = parse_scenario(text);
    for (const auto& p : s.initial.pairs()) EXPECT_EQ(p.left, p.right);
}

TEST(Scenario, NecessityDefinesInitialCoupling) {
    EXPECT_EQ(config_key(base() + "[necessity]\neps = 0.5\n"), "initial");
    std::string text = base();
    text.erase(text.find("[initial]"), text.find("[sim]") - text.find("[initial]"));
    const ScenarioSpec s = parse_scenario(text + "[necessity]\neps = 0.25\nlaw_atoms = 4\n");
    ASSERT_TRUE(s.tag.has_value());
    EXPECT_EQ(s.initial.size(), 5u);
    EXPECT_EQ(s.initial.pairs().back().weight, 0.25);
    EXPECT_TRUE(s.initial.order_supported());
    EXPECT_EQ(s.resolved.at("initial").at("source"), "necessity");
}
