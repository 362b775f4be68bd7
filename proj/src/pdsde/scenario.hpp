#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pdsde/coeffs.hpp"
#include "pdsde/conditions.hpp"
#include "pdsde/json_io.hpp"
#include "pdsde/measures.hpp"
#include "pdsde/segments.hpp"
#include "pdsde/simulate.hpp"

namespace pdsde {

// The designated ordered pair of a necessity experiment; particles started at
// exactly this pair form the event A.
struct NecessityTag {
    CouplingPair pair;
    std::size_t coordinate = 0;  // 0-based i with xi^i(0) == eta^i(0)
    double eps = 0.0;
};

struct NecessitySetup {
    PathSegment xi;
    PathSegment eta;
    EmpiricalMeasure mu;
    EmpiricalMeasure nu;
    std::size_t coordinate = 0;
    double eps = 0.5;
    std::vector<std::size_t> s_steps{1, 2, 4};
};

struct TraceConfig {
    std::size_t psi_n = 10;
    bool psi_trace = false;
};

struct ScenarioSpec {
    TimeGrid grid;
    CoeffModel model;
    CoeffModel model_bar;
    Coupling initial;
    SimConfig sim;
    std::size_t replications = 1;
    double violation_tol = 1e-9;
    ProbeConfig probes;
    bool probe_seed_follows_sim = true;
    TraceConfig trace;
    std::optional<NecessitySetup> necessity;
    std::optional<NecessityTag> tag;
    // Post-validation description embedded in reports.
    Json resolved;

    std::size_t dim() const noexcept { return model.dim(); }
    LagSpacing spacing() const noexcept { return {grid.dt(), grid.r0()}; }
};

// Parses and validates a scenario document (the TOML subset of tomlite).
// Relative file references resolve against base_dir. Throws ConfigError
// naming the offending key.
ScenarioSpec parse_scenario(const std::string& text, const std::string& base_dir = ".");
ScenarioSpec load_scenario(const std::string& path);

// Re-derives everything seed-dependent after sim.seed changes.
void override_seed(ScenarioSpec& spec, std::uint64_t seed);

}  // namespace pdsde
