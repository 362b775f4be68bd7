// Calibration run for the order-preservation tolerance of the conforming
// scenario: runs order-test at each reference seed and records
// threshold = max(factor * max_seed p95, floor).

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdsde/pdsde.h"

int main(int argc, char** argv) {
    CLI::App app{"Calibrate the order-test p95 threshold", "pdsde-calibrate"};
    std::string scenario;
    std::string out;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
    double factor = 2.0;
    double floor = 1e-12;
    unsigned threads = 1;
    app.add_option("scenario", scenario, "Scenario file")->required();
    app.add_option("--out", out, "Fixture path (stdout when omitted)");
    app.add_option("--seeds", seeds, "Reference seeds");
    app.add_option("--factor", factor, "Safety factor on the largest p95");
    app.add_option("--floor", floor, "Smallest admissible threshold");
    app.add_option("--threads", threads, "Worker threads");
    CLI11_PARSE(app, argc, argv);

    pdsde_scenario* spec = nullptr;
    if (pdsde_scenario_load(scenario.c_str(), &spec) != PDSDE_OK) {
        std::cerr << pdsde_last_error() << '\n';
        return 1;
    }
    pdsde_options opts;
    pdsde_options_init(&opts);
    opts.threads = threads;

    nlohmann::json runs = nlohmann::json::array();
    double worst = 0.0;
    double dt = 0.0;
    for (std::uint64_t seed : seeds) {
        pdsde_scenario_set_seed(spec, seed);
        pdsde_result* res = nullptr;
        if (pdsde_order_test(spec, &opts, &res) != PDSDE_OK) {
            std::cerr << pdsde_last_error() << '\n';
            pdsde_scenario_free(spec);
            return 1;
        }
        const auto body = nlohmann::json::parse(pdsde_result_json(res));
        pdsde_result_free(res);
        const double p95 = body.at("violation_stat").at("p95").get<double>();
        dt = body.at("scenario").at("grid").at("dt").get<double>();
        worst = std::max(worst, p95);
        runs.push_back({{"seed", seed}, {"p95", p95}, {"median", body.at("violation_stat").at("median")}});
        std::cerr << "seed " << seed << ": p95 " << p95 << '\n';
    }
    const std::string model_hash = pdsde_scenario_model_hash(spec);
    pdsde_scenario_free(spec);

    const nlohmann::json fixture{{"scenario", scenario},
                                 {"model_hash", model_hash},
                                 {"dt", dt},
                                 {"rule", "threshold = max(factor * max p95 over reference seeds, floor)"},
                                 {"factor", factor},
                                 {"floor", floor},
                                 {"runs", runs},
                                 {"threshold", std::max(factor * worst, floor)}};
    const std::string text = fixture.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out, std::ios::binary);
        f << text;
        if (!f) {
            std::cerr << "cannot write " << out << '\n';
            return 1;
        }
    }
    return 0;
}
