#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdsde/coeffs.hpp"
#include "pdsde/executor.hpp"
#include "pdsde/measures.hpp"
#include "pdsde/segments.hpp"

namespace pdsde {

struct ProbeConfig {
    std::size_t num_probes = 1000;
    // Fixed probe times; every other probe uses one of these, the rest draw
    // uniformly from [time_lo, time_hi].
    std::vector<double> time_points;
    double time_lo = 0.0;
    double time_hi = 1.0;
    double seg_scale = 1.0;
    std::size_t law_size = 8;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
};

enum class ViolationKind : std::uint8_t { DriftOrder, SigmaEquality, SigmaStructure };

const char* to_string(ViolationKind k) noexcept;

struct Violation {
    ViolationKind kind;
    std::size_t probe;
    std::size_t coordinate;  // 0-based i
    std::size_t noise;       // 0-based j (diffusion kinds only)
    double t;
    double lhs;
    double rhs;
    double gap;
    // Probe inputs: (xi, mu) feed lhs, (eta, nu) feed rhs.
    PathSegment xi;
    PathSegment eta;
    std::vector<PathSegment> mu;
    std::vector<PathSegment> nu;
};

struct ConditionReport {
    double alpha_hat = 0.0;
    std::size_t h1_probes_used = 0;
    std::vector<double> h2_times;
    std::vector<double> k_hat;
    std::vector<Violation> violations;
};

// Largest observed (H1) ratio over random probe pairs; a lower bound on any
// valid Lipschitz profile over the probed times. Degenerate probes (zero
// denominator) are skipped; throws DomainError if every probe is degenerate.
double estimate_h1(const CoeffModel& model, const CoeffModel& model_bar, const TimeGrid& grid,
                   const ProbeConfig& cfg, const Executor& exec, std::size_t* used = nullptr);

// |b|^2 + |bbar|^2 + |sigma|_HS^2 + |sigmabar|_HS^2 at the zero segment and
// the Dirac law at zero, for each time.
std::vector<double> check_h2(const CoeffModel& model, const CoeffModel& model_bar, const TimeGrid& grid,
                             const std::vector<double>& times);

// Probes b^i(t, xi, mu) <= bbar^i(t, eta, nu) on premise-satisfying inputs:
// xi <= eta, xi^i(0) = eta^i(0), mu <= nu.
std::vector<Violation> check_drift_order(const CoeffModel& model, const CoeffModel& model_bar,
                                         const TimeGrid& grid, const ProbeConfig& cfg, const Executor& exec);

// (a) sigma == sigmabar on identical inputs; (b) sigma^{ij} depends on
// (xi, mu) only through xi^i(0).
std::vector<Violation> check_diffusion_structure(const CoeffModel& model, const CoeffModel& model_bar,
                                                 const TimeGrid& grid, const ProbeConfig& cfg,
                                                 const Executor& exec);

ConditionReport check_conditions(const CoeffModel& model, const CoeffModel& model_bar, const TimeGrid& grid,
                                 const ProbeConfig& cfg, const Executor& exec);

}  // namespace pdsde
