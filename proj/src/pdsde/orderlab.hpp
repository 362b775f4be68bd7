#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pdsde/executor.hpp"
#include "pdsde/measures.hpp"
#include "pdsde/scenario.hpp"
#include "pdsde/simulate.hpp"

namespace pdsde {

// C^2 smoothing of s -> max(s, 0): psi_n'' = 4n^2 s on [0, 1/(2n)],
// -4n^2 (s - 1/n) on [1/(2n), 1/n], zero elsewhere, with psi_n = psi_n' = 0
// for s <= 0.
struct PsiValue {
    double value;
    double d1;
    double d2;
};

PsiValue psi(std::size_t n, double s);

// exp(n s) - 1, used on s <= 0.
double g(std::size_t n, double s);

// Per particle: max over grid times in [t0, T] and coordinates of
// (X^i(t) - Xbar^i(t))^+.
std::vector<double> violation_stat(const ParticleCloud& cloud);

// Linear-interpolation quantile (q in [0, 1]) of an unsorted sample.
double quantile(std::vector<double> sample, double q);

struct ReplicationSummary {
    std::size_t replication;
    double max;
    double p95;
    double violating_fraction;
};

struct TrialReport {
    std::vector<ReplicationSummary> replications;
    // Pooled over all particles of all replications.
    double max = 0.0;
    double p95 = 0.0;
    double median = 0.0;
    double mean = 0.0;
    double violating_fraction = 0.0;
    std::size_t samples = 0;
    double tolerance = 0.0;
    // max_i E sup_{r <= t} psi_n((X^i - Xbar^i)(r))^2 per step, averaged over
    // replications; empty unless tracing was requested.
    std::size_t psi_n = 0;
    std::vector<double> psi_times;
    std::vector<double> psi_trace;
};

struct TrialOptions {
    bool psi_trace = false;
    std::size_t psi_n = 10;
};

// Runs spec.replications seeded simulations. Throws DomainError when the
// initial coupling is not order-supported.
TrialReport run_preservation_trial(const ScenarioSpec& spec, const Executor& exec, const TrialOptions& opts = {});

// Initial coupling (1 - eps) * monotone(mu, nu) + eps * delta_(xi, eta),
// tagging the designated pair.
ScenarioSpec build_necessity_scenario(const ScenarioSpec& base, const PathSegment& xi, const PathSegment& eta,
                                      const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double eps,
                                      std::size_t coordinate);

struct DriftGapPoint {
    std::size_t steps;
    double s;
    double mean;  // mean over tagged particles of (X^i - Xbar^i)(t0 + s) / s
    double std_error;
    std::size_t tagged;
};

struct DriftGapReport {
    std::size_t coordinate = 0;
    std::vector<DriftGapPoint> points;
    // b^i(t0, xi, mu_eps) and bbar^i(t0, eta, nu_eps) evaluated directly.
    double drift = 0.0;
    double drift_bar = 0.0;
    double direct_gap = 0.0;
    std::size_t tagged = 0;
    std::size_t particles = 0;
};

// Short-time statistic over the event A. `s_steps` are multiples of dt.
// The standard error folds in the floating-point resolution of the
// difference quotient so deterministic paths do not report zero error.
DriftGapReport drift_gap_probe(const ScenarioSpec& spec, const std::vector<std::size_t>& s_steps,
                               const Executor& exec);

}  // namespace pdsde
