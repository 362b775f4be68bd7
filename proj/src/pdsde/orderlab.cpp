#include "pdsde/orderlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdsde/error.hpp"

namespace pdsde {

PsiValue psi(std::size_t n_in, double s) {
    if (n_in == 0) throw DomainError("psi: n must be >= 1");
    const double n = static_cast<double>(n_in);
    const double half = 1.0 / (2.0 * n);
    const double end = 1.0 / n;
    if (s <= 0.0) return {0.0, 0.0, 0.0};
    if (s <= half) return {2.0 * n * n * s * s * s / 3.0, 2.0 * n * n * s * s, 4.0 * n * n * s};
    if (s <= end) {
        const double u = s - end;
        return {s - half - 2.0 * n * n * u * u * u / 3.0, 1.0 - 2.0 * n * n * u * u, 0.0 - 4.0 * n * n * u};
    }
    return {s - half, 1.0, 0.0};
}

double g(std::size_t n, double s) { return std::expm1(static_cast<double>(n) * s); }

std::vector<double> violation_stat(const ParticleCloud& cloud) {
    const std::size_t first = cloud.grid().lags();
    const std::size_t last = first + cloud.steps_done();
    std::vector<double> out(cloud.size(), 0.0);
    for (std::size_t p = 0; p < cloud.size(); ++p) {
        double worst = 0.0;
        for (std::size_t c = first; c <= last; ++c) {
            for (std::size_t i = 0; i < cloud.dim(); ++i) {
                worst = std::max(worst, cloud.value(System::X, p, c, i) - cloud.value(System::Xbar, p, c, i));
            }
        }
        out[p] = worst;
    }
    return out;
}

double quantile(std::vector<double> sample, double q) {
    if (sample.empty()) throw DomainError("quantile of an empty sample");
    std::sort(sample.begin(), sample.end());
    const double h = (static_cast<double>(sample.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

namespace {

// max_i mean_p sup_{r <= t_k} psi_n(X^i - Xbar^i)(r)^2 for k = 0..steps.
std::vector<double> psi_functional(const ParticleCloud& cloud, std::size_t n) {
    const std::size_t steps = cloud.steps_done();
    const std::size_t lags = cloud.grid().lags();
    std::vector<double> best(steps + 1, 0.0);
    for (std::size_t i = 0; i < cloud.dim(); ++i) {
        std::vector<double> acc(steps + 1, 0.0);
        for (std::size_t p = 0; p < cloud.size(); ++p) {
            double running = 0.0;
            for (std::size_t c = 0; c <= lags + steps; ++c) {
                const double v = psi(n, cloud.value(System::X, p, c, i) - cloud.value(System::Xbar, p, c, i)).value;
                running = std::max(running, v * v);
                if (c >= lags) acc[c - lags] += running;
            }
        }
        for (std::size_t k = 0; k <= steps; ++k) {
            best[k] = std::max(best[k], acc[k] / static_cast<double>(cloud.size()));
        }
    }
    return best;
}

}  // namespace

TrialReport run_preservation_trial(const ScenarioSpec& spec, const Executor& exec, const TrialOptions& opts) {
    if (spec.replications == 0) throw DomainError("sim.replications must be >= 1");
    if (!spec.initial.order_supported()) {
        throw DomainError("initial coupling is not order-supported (some pair violates xi <= xibar)");
    }
    struct Rep {
        std::vector<double> stats;
        std::vector<double> psi;
    };
    std::vector<Rep> reps(spec.replications);
    exec.for_each(spec.replications, [&](std::size_t r) {
        const RunResult res = run(spec, r, exec);
        reps[r].stats = violation_stat(res.cloud);
        if (opts.psi_trace) reps[r].psi = psi_functional(res.cloud, opts.psi_n);
    });

    TrialReport out;
    out.tolerance = spec.violation_tol;
    std::vector<double> pooled;
    pooled.reserve(spec.replications * spec.sim.particles);
    std::size_t violating = 0;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        const auto& st = reps[r].stats;
        const auto bad = static_cast<std::size_t>(
            std::count_if(st.begin(), st.end(), [&](double v) { return v > spec.violation_tol; }));
        out.replications.push_back({r, *std::max_element(st.begin(), st.end()), quantile(st, 0.95),
                                    static_cast<double>(bad) / static_cast<double>(st.size())});
        violating += bad;
        pooled.insert(pooled.end(), st.begin(), st.end());
    }
    out.samples = pooled.size();
    out.max = *std::max_element(pooled.begin(), pooled.end());
    out.p95 = quantile(pooled, 0.95);
    out.median = quantile(pooled, 0.5);
    double sum = 0.0;
    for (double v : pooled) sum += v;
    out.mean = sum / static_cast<double>(pooled.size());
    out.violating_fraction = static_cast<double>(violating) / static_cast<double>(pooled.size());

    if (opts.psi_trace) {
        out.psi_n = opts.psi_n;
        const std::size_t steps = spec.grid.steps();
        out.psi_trace.assign(steps + 1, 0.0);
        for (const auto& rep : reps) {
            for (std::size_t k = 0; k <= steps; ++k) out.psi_trace[k] += rep.psi[k];
        }
        for (std::size_t k = 0; k <= steps; ++k) {
            out.psi_trace[k] /= static_cast<double>(reps.size());
            out.psi_times.push_back(spec.grid.time_at_step(k));
        }
    }
    return out;
}

ScenarioSpec build_necessity_scenario(const ScenarioSpec& base, const PathSegment& xi, const PathSegment& eta,
                                      const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double eps,
                                      std::size_t coordinate) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("necessity: eps must lie in (0, 1)");
    if (xi.cols() != base.grid.segment_columns() || xi.dim() != base.dim()) {
        throw DimensionError("necessity: xi does not match the scenario grid");
    }
    if (coordinate >= xi.dim()) throw DomainError("necessity: coordinate out of range");
    if (!leq(xi, eta)) throw DomainError("necessity: xi <= eta fails");
    if (xi.current(coordinate) != eta.current(coordinate)) {
        throw DomainError("necessity: xi^i(0) != eta^i(0) for the designated coordinate");
    }
    if (!stochastic_leq(mu, nu).holds) throw DomainError("necessity: mu <= nu fails");
    ScenarioSpec out = base;
    out.initial = mixture_coupling(monotone_coupling(mu, nu), xi, eta, eps);
    out.tag = NecessityTag{{xi, eta, eps}, coordinate, eps};
    if (out.resolved.is_object()) {
        out.resolved["initial"] = Json{{"source", "necessity"},
                                       {"pairs", out.initial.size()},
                                       {"eps", eps},
                                       {"coordinate", coordinate + 1},
                                       {"order_supported", out.initial.order_supported()}};
    }
    return out;
}

DriftGapReport drift_gap_probe(const ScenarioSpec& spec, const std::vector<std::size_t>& s_steps,
                               const Executor& exec) {
    if (!spec.tag) throw DomainError("drift_gap_probe needs a necessity scenario (no tagged pair)");
    if (s_steps.empty()) throw DomainError("drift_gap_probe: no s values");
    const std::size_t i = spec.tag->coordinate;
    const std::size_t max_steps = *std::max_element(s_steps.begin(), s_steps.end());
    if (std::find(s_steps.begin(), s_steps.end(), std::size_t{0}) != s_steps.end()) {
        throw DomainError("drift_gap_probe: s must be a positive multiple of dt");
    }
    if (max_steps > spec.grid.steps()) throw DomainError("drift_gap_probe: s exceeds T - t0");

    ScenarioSpec shortened = spec;
    shortened.grid = spec.grid.with_end(spec.grid.time_at_step(max_steps));
    const std::size_t lags = spec.grid.lags();

    struct Rep {
        std::vector<std::vector<double>> quotients;  // per s, per tagged particle
        std::vector<double> magnitude;                // per s, max |X| + |Xbar|
        std::size_t tagged = 0;
    };
    std::vector<Rep> reps(spec.replications);
    exec.for_each(spec.replications, [&](std::size_t r) {
        const RunResult res = run(shortened, r, exec);
        Rep& rep = reps[r];
        rep.quotients.resize(s_steps.size());
        rep.magnitude.assign(s_steps.size(), 0.0);
        for (std::size_t p = 0; p < res.cloud.size(); ++p) {
            if (!res.cloud.tagged()[p]) continue;
            ++rep.tagged;
            for (std::size_t k = 0; k < s_steps.size(); ++k) {
                const double s = static_cast<double>(s_steps[k]) * spec.grid.dt();
                const double x = res.cloud.value(System::X, p, lags + s_steps[k], i);
                const double xb = res.cloud.value(System::Xbar, p, lags + s_steps[k], i);
                rep.quotients[k].push_back((x - xb) / s);
                rep.magnitude[k] = std::max(rep.magnitude[k], std::abs(x) + std::abs(xb));
            }
        }
    });

    DriftGapReport out;
    out.coordinate = i;
    out.particles = spec.sim.particles * spec.replications;
    for (const auto& rep : reps) out.tagged += rep.tagged;
    if (out.tagged == 0) throw DomainError("drift_gap_probe: no tagged particles");

    for (std::size_t k = 0; k < s_steps.size(); ++k) {
        const double s = static_cast<double>(s_steps[k]) * spec.grid.dt();
        double sum = 0.0, magnitude = 0.0;
        for (const auto& rep : reps) {
            for (double q : rep.quotients[k]) sum += q;
            magnitude = std::max(magnitude, rep.magnitude[k]);
        }
        const double n = static_cast<double>(out.tagged);
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& rep : reps) {
            for (double q : rep.quotients[k]) ss += (q - mean) * (q - mean);
        }
        const double var = out.tagged > 1 ? ss / (n - 1.0) : 0.0;
        // Each Euler step adds a few roundings of size eps * |state|.
        const double resolution =
            8.0 * static_cast<double>(s_steps[k]) * std::numeric_limits<double>::epsilon() * magnitude / s;
        out.points.push_back({s_steps[k], s, mean, std::sqrt(var / n + resolution * resolution), out.tagged});
    }

    const Marginals marg = marginals(spec.initial);
    const double t0 = spec.grid.t0();
    out.drift = eval_coeff(spec.model.drift(i), t0, spec.tag->pair.left, marg.left);
    out.drift_bar = eval_coeff(spec.model_bar.drift(i), t0, spec.tag->pair.right, marg.right);
    out.direct_gap = out.drift - out.drift_bar;
    return out;
}

}  // namespace pdsde
