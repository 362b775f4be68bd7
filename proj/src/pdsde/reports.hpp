#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pdsde/executor.hpp"
#include "pdsde/json_io.hpp"
#include "pdsde/measures.hpp"
#include "pdsde/scenario.hpp"

namespace pdsde {

struct Artifact {
    std::string name;  // file name, e.g. "psi_trace.csv"
    std::string content;
};

// Output of one command: the JSON report, its main table as CSV, extra files,
// and whether a violation was detected.
struct Report {
    Json body;
    std::string csv;
    std::vector<Artifact> artifacts;
    bool flagged = false;
};

struct ReportOptions {
    bool timing = false;        // include wall-clock seconds (breaks byte-identity)
    bool trajectories = false;  // simulate: dump replication 0 paths
    bool psi_trace = false;     // order-test: force the psi_n trace on
    std::size_t witness_limit = 10;
};

Report simulate_report(const ScenarioSpec& spec, const Executor& exec, const ReportOptions& opts);
Report order_test_report(const ScenarioSpec& spec, const Executor& exec, const ReportOptions& opts);
Report necessity_report(const ScenarioSpec& spec, const Executor& exec, const ReportOptions& opts);
Report conditions_report(const ScenarioSpec& spec, const Executor& exec, const ReportOptions& opts);

Report psi_table_report(const std::vector<std::size_t>& ns, double lo, double hi, std::size_t points);
Report w2_report(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
Report dominance_report(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// %.17g, the CSV number format.
std::string csv_number(double v);

}  // namespace pdsde
