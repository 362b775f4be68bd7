#include <gtest/gtest.h>

#include <string>

#include "pdsde/pdsde.h"

namespace {

const char* kMeasureA =
    R"({"shape":[1,2],"atoms":[{"dim":1,"values":[[0.0,0.0]]},{"dim":1,"values":[[1.0,1.0]]}]})";
const char* kMeasureB =
    R"({"shape":[1,2],"atoms":[{"dim":1,"values":[[1.5,1.5]]},{"dim":1,"values":[[0.5,0.5]]}]})";

const char* kScenario = R"toml([grid]
t0 = 0.0
T = 0.1
dt = 0.01
r0 = 0.02
[dims]
d = 1
m = 1
[models]
b = ["0.5*x[1](-0.02) + 0.5*E[x[1](0)] - x[1](0)"]
sigma = [["x[1](-0.02)"]]
sigmabar = [["0.5*x[1](0)"]]
[initial]
type = "builtin"
kind = "ordered"
atoms = 4
seed = 2
[sim]
N = 16
seed = 9
replications = 2
[probes]
num_probes = 50
)toml";

struct Scenario {
    pdsde_scenario* h = nullptr;
    ~Scenario() { pdsde_scenario_free(h); }
};

struct Result {
    pdsde_result* h = nullptr;
    ~Result() { pdsde_result_free(h); }
};

struct Measure {
    pdsde_measure* h = nullptr;
    ~Measure() { pdsde_measure_free(h); }
};

}  // namespace

TEST(CApi, Basics) {
    EXPECT_NE(std::string(pdsde_version()), "");
    EXPECT_STREQ(pdsde_status_name(PDSDE_OK), "ok");
    EXPECT_STREQ(pdsde_status_name(PDSDE_ERR_CONFIG), "config");
    pdsde_options o;
    o.threads = 7;
    pdsde_options_init(&o);
    EXPECT_EQ(o.threads, 1u);
    EXPECT_EQ(o.timing, 0);
}

TEST(CApi, NullArguments) {
    EXPECT_EQ(pdsde_scenario_parse(nullptr, nullptr, nullptr), PDSDE_ERR_ARGUMENT);
    EXPECT_NE(std::string(pdsde_last_error()), "");
    double v = 0.0;
    EXPECT_EQ(pdsde_w2(nullptr, nullptr, &v), PDSDE_ERR_ARGUMENT);
    pdsde_result* r = nullptr;
    EXPECT_EQ(pdsde_order_test(nullptr, nullptr, &r), PDSDE_ERR_ARGUMENT);
    EXPECT_EQ(r, nullptr);
    pdsde_scenario_free(nullptr);
    pdsde_result_free(nullptr);
}

TEST(CApi, ConfigErrorKey) {
    Scenario s;
    EXPECT_EQ(pdsde_scenario_parse("[grid]\nt0 = 0.0\n", ".", &s.h), PDSDE_ERR_CONFIG);
    EXPECT_EQ(s.h, nullptr);
    EXPECT_STREQ(pdsde_last_error_key(), "grid.T");
    EXPECT_EQ(pdsde_scenario_load("/nonexistent/file.toml", &s.h), PDSDE_ERR_IO);
}

TEST(CApi, MeasuresAndW2) {
    Measure a, b;
    ASSERT_EQ(pdsde_measure_parse(kMeasureA, &a.h), PDSDE_OK) << pdsde_last_error();
    ASSERT_EQ(pdsde_measure_parse(kMeasureB, &b.h), PDSDE_OK) << pdsde_last_error();
    EXPECT_EQ(pdsde_measure_size(a.h), 2u);
    double v = -1.0;
    ASSERT_EQ(pdsde_w2(a.h, a.h, &v), PDSDE_OK);
    EXPECT_EQ(v, 0.0);
    ASSERT_EQ(pdsde_w2(a.h, b.h, &v), PDSDE_OK);
    EXPECT_NEAR(v, 0.5, 1e-15);

    int holds = 0;
    size_t matching[2] = {9, 9};
    ASSERT_EQ(pdsde_dominance(a.h, b.h, &holds, matching), PDSDE_OK);
    EXPECT_EQ(holds, 1);
    EXPECT_EQ(matching[0], 1u);
    EXPECT_EQ(matching[1], 0u);
    ASSERT_EQ(pdsde_dominance(b.h, a.h, &holds, nullptr), PDSDE_OK);
    EXPECT_EQ(holds, 0);

    Result r;
    ASSERT_EQ(pdsde_w2_report(a.h, a.h, &r.h), PDSDE_OK);
    EXPECT_STREQ(pdsde_result_json(r.h), R"({"w2":0.0})");

    Measure bad;
    EXPECT_EQ(pdsde_measure_parse("{", &bad.h), PDSDE_ERR_PARSE);
}

TEST(CApi, PsiTable) {
    const size_t ns[2] = {1, 2};
    Result r;
    ASSERT_EQ(pdsde_psi_table(ns, 2, -1.0, 1.0, 5, &r.h), PDSDE_OK);
    const std::string csv = pdsde_result_csv(r.h);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,s,psi,d1,d2,g");
    EXPECT_NE(csv.find("\n2,1,0.75,1,0,\n"), std::string::npos) << csv;
    EXPECT_EQ(pdsde_psi_table(ns, 0, -1.0, 1.0, 5, &r.h), PDSDE_ERR_DOMAIN);
}

TEST(CApi, OrderTestIsThreadInvariant) {
    Scenario s;
    ASSERT_EQ(pdsde_scenario_parse(kScenario, ".", &s.h), PDSDE_OK) << pdsde_last_error();
    pdsde_options o;
    pdsde_options_init(&o);
    o.psi_trace = 1;
    Result a, b;
    ASSERT_EQ(pdsde_order_test(s.h, &o, &a.h), PDSDE_OK) << pdsde_last_error();
    o.threads = 3;
    ASSERT_EQ(pdsde_order_test(s.h, &o, &b.h), PDSDE_OK);
    EXPECT_STREQ(pdsde_result_json(a.h), pdsde_result_json(b.h));
    EXPECT_STREQ(pdsde_result_csv(a.h), pdsde_result_csv(b.h));
    ASSERT_EQ(pdsde_result_artifact_count(a.h), pdsde_result_artifact_count(b.h));
    bool has_trace = false;
    for (size_t k = 0; k < pdsde_result_artifact_count(a.h); ++k) {
        EXPECT_STREQ(pdsde_result_artifact_data(a.h, k), pdsde_result_artifact_data(b.h, k));
        has_trace |= std::string(pdsde_result_artifact_name(a.h, k)) == "psi_trace.csv";
    }
    EXPECT_TRUE(has_trace);
    EXPECT_EQ(pdsde_result_artifact_name(a.h, 99), nullptr);
}

TEST(CApi, SeedOverrideChangesOutput) {
    Scenario s;
    ASSERT_EQ(pdsde_scenario_parse(kScenario, ".", &s.h), PDSDE_OK);
    Result a, b;
    ASSERT_EQ(pdsde_simulate(s.h, nullptr, &a.h), PDSDE_OK) << pdsde_last_error();
    ASSERT_EQ(pdsde_scenario_set_seed(s.h, 10), PDSDE_OK);
    ASSERT_EQ(pdsde_simulate(s.h, nullptr, &b.h), PDSDE_OK);
    EXPECT_STRNE(pdsde_result_json(a.h), pdsde_result_json(b.h));
    EXPECT_NE(std::string(pdsde_scenario_json(s.h)).find("\"seed\":10"), std::string::npos);
    EXPECT_EQ(std::string(pdsde_scenario_model_hash(s.h)).size(), 16u);
}

TEST(CApi, CheckConditionsFlagsLaggedDiffusion) {
    Scenario s;
    ASSERT_EQ(pdsde_scenario_parse(kScenario, ".", &s.h), PDSDE_OK);
    Result r;
    ASSERT_EQ(pdsde_check_conditions(s.h, nullptr, &r.h), PDSDE_OK) << pdsde_last_error();
    EXPECT_EQ(pdsde_result_flagged(r.h), 1);
    EXPECT_NE(std::string(pdsde_result_json(r.h)).find("sigma-structure"), std::string::npos);
}

TEST(CApi, NecessityNeedsSection) {
    Scenario s;
    ASSERT_EQ(pdsde_scenario_parse(kScenario, ".", &s.h), PDSDE_OK);
    Result r;
    EXPECT_EQ(pdsde_necessity_probe(s.h, nullptr, &r.h), PDSDE_ERR_CONFIG);
    EXPECT_STREQ(pdsde_last_error_key(), "necessity");
    EXPECT_EQ(r.h, nullptr);
}
