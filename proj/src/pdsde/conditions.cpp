#include "pdsde/conditions.hpp"

#include <algorithm>
#include <cmath>

#include "pdsde/error.hpp"
#include "pdsde/rng.hpp"

namespace pdsde {

const char* to_string(ViolationKind k) noexcept {
    switch (k) {
    case ViolationKind::DriftOrder: return "drift-order";
    case ViolationKind::SigmaEquality: return "sigma-equality";
    case ViolationKind::SigmaStructure: return "sigma-structure";
    }
    return "unknown";
}

namespace {

enum Family : std::uint64_t { kH1 = 1, kDrift = 2, kSigmaEq = 3, kSigmaStruct = 4 };

struct Probe {
    rng::Stream stream;
    std::size_t dim;
    std::size_t cols;
    double scale;

    PathSegment segment() {
        PathSegment s(dim, cols);
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t i = 0; i < dim; ++i) s(i, j) = scale * stream.normal();
        }
        return s;
    }

    // eta >= xi entrywise; a quarter of the time eta == xi.
    PathSegment above(const PathSegment& xi) {
        PathSegment eta = xi;
        if (stream.uniform() < 0.25) return eta;
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t i = 0; i < dim; ++i) eta(i, j) += scale * std::abs(stream.normal());
        }
        return eta;
    }

    PathSegment perturbed(const PathSegment& xi, double rel) {
        PathSegment eta = xi;
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t i = 0; i < dim; ++i) eta(i, j) += rel * scale * stream.normal();
        }
        return eta;
    }

    std::vector<PathSegment> law(std::size_t n) {
        std::vector<PathSegment> atoms;
        atoms.reserve(n);
        for (std::size_t k = 0; k < n; ++k) atoms.push_back(segment());
        return atoms;
    }

    // Atom-wise nonnegative shift: mu <= nu through the identity coupling.
    std::vector<PathSegment> law_above(const std::vector<PathSegment>& mu) {
        std::vector<PathSegment> nu;
        nu.reserve(mu.size());
        for (const auto& a : mu) nu.push_back(above(a));
        return nu;
    }
};

Probe make_probe(const ProbeConfig& cfg, Family family, std::size_t index, const TimeGrid& grid,
                 std::size_t dim) {
    return Probe{rng::Stream(rng::derive_seed(cfg.seed, family), index), dim, grid.segment_columns(), cfg.seg_scale};
}

double probe_time(const ProbeConfig& cfg, std::size_t index, Probe& pr) {
    const double u = pr.stream.uniform();
    if (!cfg.time_points.empty() && index % 2 == 0) return cfg.time_points[(index / 2) % cfg.time_points.size()];
    return cfg.time_lo + (cfg.time_hi - cfg.time_lo) * u;
}

std::vector<SegmentView> views_of(const std::vector<PathSegment>& atoms) {
    std::vector<SegmentView> v;
    v.reserve(atoms.size());
    for (const auto& a : atoms) v.push_back(a.view());
    return v;
}

MeasureTerminals union_terminals(const CoeffModel& a, const CoeffModel& b) {
    MeasureTerminals t = a.terminals();
    t.merge(b.terminals());
    return t;
}

void validate(const CoeffModel& model, const CoeffModel& model_bar, const ProbeConfig& cfg) {
    if (model.dim() != model_bar.dim() || model.noise_dim() != model_bar.noise_dim()) {
        throw DimensionError("models must share (d, m)");
    }
    if (cfg.num_probes == 0) throw DomainError("probes.num_probes must be >= 1");
    if (cfg.law_size == 0) throw DomainError("probes.law_size must be >= 1");
    if (!(cfg.seg_scale > 0.0)) throw DomainError("probes.seg_scale must be positive");
}

std::vector<Violation> flatten(std::vector<std::vector<Violation>>& per_probe) {
    std::vector<Violation> out;
    for (auto& v : per_probe) {
        for (auto& x : v) out.push_back(std::move(x));
    }
    return out;
}

double squared_diff_sum(const CoeffModel& m, double t, SegmentView xi, const LawMoments& mu, SegmentView eta,
                        const LawMoments& nu) {
    double acc = 0.0;
    for (const auto& e : m.drift()) {
        const double diff = e.eval(t, xi, mu) - e.eval(t, eta, nu);
        acc += diff * diff;
    }
    for (const auto& e : m.diffusion()) {
        const double diff = e.eval(t, xi, mu) - e.eval(t, eta, nu);
        acc += diff * diff;
    }
    return acc;
}

}  // namespace

double estimate_h1(const CoeffModel& model, const CoeffModel& model_bar, const TimeGrid& grid,
                   const ProbeConfig& cfg, const Executor& exec, std::size_t* used) {
    validate(model, model_bar, cfg);
    const MeasureTerminals need = union_terminals(model, model_bar);
    std::vector<double> ratio(cfg.num_probes, -1.0);
    exec.for_each(cfg.num_probes, [&](std::size_t p) {
        Probe pr = make_probe(cfg, kH1, p, grid, model.dim());
        const double t = probe_time(cfg, p, pr);
        static constexpr double kScales[] = {1.0, 0.1, 0.01};
        const double rel = kScales[p % 3];
        const PathSegment xi = pr.segment();
        const PathSegment eta = pr.stream.uniform() < 0.2 ? xi : pr.perturbed(xi, rel);
        const auto mu = pr.law(cfg.law_size);
        std::vector<PathSegment> nu;
        if (pr.stream.uniform() < 0.2) {
            nu = mu;
        } else {
            for (const auto& a : mu) nu.push_back(pr.perturbed(a, rel));
        }
        const double seg_dist = sup_distance(xi, eta);
        const double law_dist = w2(EmpiricalMeasure(mu), EmpiricalMeasure(nu));
        const double denom = seg_dist * seg_dist + law_dist * law_dist;
        if (denom == 0.0) return;
        const auto mu_m = LawMoments::compute(need, views_of(mu));
        const auto nu_m = LawMoments::compute(need, views_of(nu));
        const double num = squared_diff_sum(model, t, xi, mu_m, eta, nu_m) +
                           squared_diff_sum(model_bar, t, xi, mu_m, eta, nu_m);
        ratio[p] = num / denom;
    });
    std::size_t count = 0;
    double best = 0.0;
    for (double r : ratio) {
        if (r < 0.0) continue;
        ++count;
        best = std::max(best, r);
    }
    if (count == 0) throw DomainError("estimate_h1: every probe was degenerate");
    if (used) *used = count;
    return best;
}

std::vector<double> check_h2(const CoeffModel& model, const CoeffModel& model_bar, const TimeGrid& grid,
                             const std::vector<double>& times) {
    if (model.dim() != model_bar.dim() || model.noise_dim() != model_bar.noise_dim()) {
        throw DimensionError("models must share (d, m)");
    }
    const PathSegment zero(model.dim(), grid.segment_columns());
    const std::vector<SegmentView> dirac{zero.view()};
    const LawMoments law = LawMoments::compute(union_terminals(model, model_bar), dirac);
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        double acc = 0.0;
        for (const CoeffModel* m : {&model, &model_bar}) {
            for (const auto& e : m->drift()) {
                const double v = e.eval(t, zero, law);
                acc += v * v;
            }
            for (const auto& e : m->diffusion()) {
                const double v = e.eval(t, zero, law);
                acc += v * v;
            }
        }
        out.push_back(acc);
    }
    return out;
}

std::vector<Violation> check_drift_order(const CoeffModel& model, const CoeffModel& model_bar,
                                         const TimeGrid& grid, const ProbeConfig& cfg, const Executor& exec) {
    validate(model, model_bar, cfg);
    const MeasureTerminals need = union_terminals(model, model_bar);
    const std::size_t d = model.dim();
    const std::size_t now = grid.lags();
    std::vector<std::vector<Violation>> found(cfg.num_probes);
    exec.for_each(cfg.num_probes, [&](std::size_t p) {
        Probe pr = make_probe(cfg, kDrift, p, grid, d);
        const double t = probe_time(cfg, p, pr);
        const auto mu = pr.law(cfg.law_size);
        const auto nu = pr.law_above(mu);
        const auto mu_m = LawMoments::compute(need, views_of(mu));
        const auto nu_m = LawMoments::compute(need, views_of(nu));
        const PathSegment xi = pr.segment();
        const PathSegment base = pr.above(xi);
        for (std::size_t i = 0; i < d; ++i) {
            PathSegment eta = base;
            eta(i, now) = xi(i, now);
            const double lhs = model.drift(i).eval(t, xi, mu_m);
            const double rhs = model_bar.drift(i).eval(t, eta, nu_m);
            if (lhs - rhs > cfg.tolerance) {
                found[p].push_back({ViolationKind::DriftOrder, p, i, 0, t, lhs, rhs, lhs - rhs, xi, eta, mu, nu});
            }
        }
    });
    return flatten(found);
}

std::vector<Violation> check_diffusion_structure(const CoeffModel& model, const CoeffModel& model_bar,
                                                 const TimeGrid& grid, const ProbeConfig& cfg,
                                                 const Executor& exec) {
    validate(model, model_bar, cfg);
    const MeasureTerminals need = union_terminals(model, model_bar);
    const std::size_t d = model.dim(), m = model.noise_dim();
    const std::size_t now = grid.lags();

    std::vector<std::vector<Violation>> equality(cfg.num_probes), structure(cfg.num_probes);
    exec.for_each(cfg.num_probes, [&](std::size_t p) {
        Probe pr = make_probe(cfg, kSigmaEq, p, grid, d);
        const double t = probe_time(cfg, p, pr);
        const PathSegment xi = pr.segment();
        const auto mu = pr.law(cfg.law_size);
        const auto mu_m = LawMoments::compute(need, views_of(mu));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double lhs = model.diffusion(i, j).eval(t, xi, mu_m);
                const double rhs = model_bar.diffusion(i, j).eval(t, xi, mu_m);
                const double gap = std::abs(lhs - rhs);
                if (gap > cfg.tolerance) {
                    equality[p].push_back({ViolationKind::SigmaEquality, p, i, j, t, lhs, rhs, gap, xi, xi, mu, mu});
                }
            }
        }
    });
    exec.for_each(cfg.num_probes, [&](std::size_t p) {
        Probe pr = make_probe(cfg, kSigmaStruct, p, grid, d);
        const double t = probe_time(cfg, p, pr);
        const PathSegment xi = pr.segment();
        const PathSegment other = pr.segment();
        const auto mu = pr.law(cfg.law_size);
        const auto nu = pr.law(cfg.law_size);
        const auto mu_m = LawMoments::compute(need, views_of(mu));
        const auto nu_m = LawMoments::compute(need, views_of(nu));
        for (std::size_t i = 0; i < d; ++i) {
            PathSegment eta = other;
            eta(i, now) = xi(i, now);
            for (std::size_t j = 0; j < m; ++j) {
                const double lhs = model.diffusion(i, j).eval(t, xi, mu_m);
                const double rhs = model.diffusion(i, j).eval(t, eta, nu_m);
                const double gap = std::abs(lhs - rhs);
                if (gap > cfg.tolerance) {
                    structure[p].push_back({ViolationKind::SigmaStructure, p, i, j, t, lhs, rhs, gap, xi, eta, mu, nu});
                }
            }
        }
    });
    auto out = flatten(equality);
    auto more = flatten(structure);
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    return out;
}

ConditionReport check_conditions(const CoeffModel& model, const CoeffModel& model_bar, const TimeGrid& grid,
                                 const ProbeConfig& cfg, const Executor& exec) {
    ConditionReport r;
    r.alpha_hat = estimate_h1(model, model_bar, grid, cfg, exec, &r.h1_probes_used);
    r.h2_times = cfg.time_points.empty() ? std::vector<double>{cfg.time_lo, cfg.time_hi} : cfg.time_points;
    r.k_hat = check_h2(model, model_bar, grid, r.h2_times);
    r.violations = check_drift_order(model, model_bar, grid, cfg, exec);
    auto sigma = check_diffusion_structure(model, model_bar, grid, cfg, exec);
    r.violations.insert(r.violations.end(), std::make_move_iterator(sigma.begin()),
                        std::make_move_iterator(sigma.end()));
    return r;
}

}  // namespace pdsde
