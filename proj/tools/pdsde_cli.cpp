// Command-line front end over the pdsde C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdsde/pdsde.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kViolation = 2, kBlowUp = 3 };

int report_error(const std::string& status, const std::string& message, const std::string& key = {}) {
    nlohmann::json err{{"status", status}, {"message", message}};
    if (!key.empty()) err["key"] = key;
    std::cerr << nlohmann::json{{"error", err}}.dump() << '\n';
    return status == "numeric" ? kBlowUp : kUsage;
}

int api_error(pdsde_status s) { return report_error(pdsde_status_name(s), pdsde_last_error(), pdsde_last_error_key()); }

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "json";
    unsigned threads = 1;
    bool timing = false;
};

bool write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    return static_cast<bool>(f);
}

// Prints the result per --format and writes report plus artifacts under --out.
int finish(const Globals& g, const std::string& command, pdsde_result* res) {
    const std::string json = pdsde_result_json(res);
    const std::string csv = pdsde_result_csv(res);
    const bool flagged = pdsde_result_flagged(res) != 0;
    std::vector<std::pair<std::string, std::string>> artifacts;
    for (std::size_t k = 0; k < pdsde_result_artifact_count(res); ++k) {
        artifacts.emplace_back(pdsde_result_artifact_name(res, k), pdsde_result_artifact_data(res, k));
    }
    pdsde_result_free(res);

    if (!g.out.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(g.out, ec);
        if (ec) return report_error("io", "cannot create directory " + g.out + ": " + ec.message());
        const std::filesystem::path dir(g.out);
        bool ok = write_file(dir / (command + ".json"), json + "\n");
        ok = write_file(dir / (command + ".csv"), csv) && ok;
        for (const auto& [name, data] : artifacts) ok = write_file(dir / name, data) && ok;
        if (!ok) return report_error("io", "cannot write into " + g.out);
    }
    if (g.format == "csv") {
        std::cout << csv;
    } else {
        std::cout << json << '\n';
    }
    std::cout.flush();
    return flagged ? kViolation : kOk;
}

using ScenarioCommand = pdsde_status (*)(const pdsde_scenario*, const pdsde_options*, pdsde_result**);

int run_scenario(const Globals& g, const std::string& command, const std::string& path, ScenarioCommand cmd,
                 bool trajectories, bool psi_trace) {
    pdsde_scenario* sc = nullptr;
    if (const pdsde_status s = pdsde_scenario_load(path.c_str(), &sc); s != PDSDE_OK) return api_error(s);
    if (g.seed) {
        if (const pdsde_status s = pdsde_scenario_set_seed(sc, *g.seed); s != PDSDE_OK) {
            pdsde_scenario_free(sc);
            return api_error(s);
        }
    }
    pdsde_options opts;
    pdsde_options_init(&opts);
    opts.threads = g.threads;
    opts.timing = g.timing ? 1 : 0;
    opts.trajectories = trajectories ? 1 : 0;
    opts.psi_trace = psi_trace ? 1 : 0;
    pdsde_result* res = nullptr;
    const pdsde_status s = cmd(sc, &opts, &res);
    pdsde_scenario_free(sc);
    if (s != PDSDE_OK) return api_error(s);
    return finish(g, command, res);
}

using MeasureCommand = pdsde_status (*)(const pdsde_measure*, const pdsde_measure*, pdsde_result**);

int run_measures(const Globals& g, const std::string& command, const std::string& a, const std::string& b,
                 MeasureCommand cmd) {
    pdsde_measure* mu = nullptr;
    pdsde_measure* nu = nullptr;
    if (const pdsde_status s = pdsde_measure_load(a.c_str(), &mu); s != PDSDE_OK) return api_error(s);
    if (const pdsde_status s = pdsde_measure_load(b.c_str(), &nu); s != PDSDE_OK) {
        pdsde_measure_free(mu);
        return api_error(s);
    }
    pdsde_result* res = nullptr;
    const pdsde_status s = cmd(mu, nu, &res);
    pdsde_measure_free(mu);
    pdsde_measure_free(nu);
    if (s != PDSDE_OK) return api_error(s);
    return finish(g, command, res);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and order-preservation checks for path-distribution dependent SDEs", "pdsde"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", pdsde_version());

    Globals g;
    app.add_option("--seed", g.seed, "Override sim.seed of the scenario");
    app.add_option("--out", g.out, "Directory for report and trace files");
    app.add_option("--format", g.format, "Standard output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    app.add_flag("--timing", g.timing, "Add wall-clock seconds to reports");

    std::string scenario;
    bool trajectories = false;
    bool psi_trace = false;

    auto* simulate = app.add_subcommand("simulate", "Run the coupled particle system");
    simulate->add_option("scenario", scenario, "Scenario file")->required();
    simulate->add_flag("--trajectories", trajectories, "Write per-particle paths of replication 0 (needs --out)");

    auto* order = app.add_subcommand("order-test", "Order-preservation trial");
    order->add_option("scenario", scenario, "Scenario file")->required();
    order->add_flag("--psi-trace", psi_trace, "Trace the psi_n functional over time");

    auto* necessity = app.add_subcommand("necessity-probe", "Short-time drift-gap probe on the tagged pair");
    necessity->add_option("scenario", scenario, "Scenario file")->required();

    auto* conditions = app.add_subcommand("check-conditions", "Probe the growth, Lipschitz and order conditions");
    conditions->add_option("scenario", scenario, "Scenario file")->required();

    std::string a, b;
    auto* w2 = app.add_subcommand("w2", "Exact Wasserstein-2 distance of two measure files");
    w2->add_option("mu", a, "Measure JSON")->required();
    w2->add_option("nu", b, "Measure JSON")->required();

    auto* dominance = app.add_subcommand("dominance", "Stochastic order mu <= nu with a matching witness");
    dominance->add_option("mu", a, "Measure JSON")->required();
    dominance->add_option("nu", b, "Measure JSON")->required();

    std::vector<std::size_t> ns{1, 2, 10, 100};
    double lo = -0.5, hi = 1.5;
    std::size_t points = 41;
    auto* psi = app.add_subcommand("psi-table", "Tabulate psi_n, its derivatives and g_n");
    psi->add_option("--n", ns, "Values of n")->check(CLI::PositiveNumber);
    psi->add_option("--lo", lo, "Smallest s");
    psi->add_option("--hi", hi, "Largest s");
    psi->add_option("--points", points, "Number of s values")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what());
    }

    if (*simulate) return run_scenario(g, "simulate", scenario, &pdsde_simulate, trajectories, false);
    if (*order) return run_scenario(g, "order-test", scenario, &pdsde_order_test, false, psi_trace);
    if (*necessity) return run_scenario(g, "necessity-probe", scenario, &pdsde_necessity_probe, false, false);
    if (*conditions) return run_scenario(g, "check-conditions", scenario, &pdsde_check_conditions, false, false);
    if (*w2) return run_measures(g, "w2", a, b, &pdsde_w2_report);
    if (*dominance) return run_measures(g, "dominance", a, b, &pdsde_dominance_report);
    if (*psi) {
        pdsde_result* res = nullptr;
        const pdsde_status s = pdsde_psi_table(ns.data(), ns.size(), lo, hi, points, &res);
        if (s != PDSDE_OK) return api_error(s);
        return finish(g, "psi-table", res);
    }
    return report_error("usage", "no subcommand");
}
