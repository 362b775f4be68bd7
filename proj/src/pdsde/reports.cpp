#include "pdsde/reports.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>

#include "pdsde/conditions.hpp"
#include "pdsde/error.hpp"
#include "pdsde/orderlab.hpp"
#include "pdsde/simulate.hpp"

namespace pdsde {

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

void stamp(Report& r, const ReportOptions& opts, Clock::time_point start) {
    if (opts.timing) r.body["wall_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
}

Json base(const char* command, const ScenarioSpec& spec) {
    return Json{{"command", command}, {"scenario", spec.resolved}};
}

std::string coord_label(const char* sys, std::size_t p, std::size_t i) {
    return "p" + std::to_string(p) + "_" + sys + std::to_string(i + 1);
}

std::string trajectory_csv(const ParticleCloud& cloud, System s) {
    const char* sys = s == System::X ? "x" : "xbar";
    std::string out = "time";
    for (std::size_t p = 0; p < cloud.size(); ++p) {
        for (std::size_t i = 0; i < cloud.dim(); ++i) out += "," + coord_label(sys, p, i);
    }
    out += '\n';
    const std::size_t last = cloud.grid().lags() + cloud.steps_done();
    for (std::size_t c = 0; c <= last; ++c) {
        out += csv_number(cloud.grid().time_at_column(c));
        for (std::size_t p = 0; p < cloud.size(); ++p) {
            for (std::size_t i = 0; i < cloud.dim(); ++i) out += "," + csv_number(cloud.value(s, p, c, i));
        }
        out += '\n';
    }
    return out;
}

Json measure_segments(const std::vector<PathSegment>& atoms, const ScenarioSpec& spec) {
    Json out = Json::array();
    for (const auto& a : atoms) out.push_back(segment_json(a, spec.grid.dt(), spec.grid.r0()));
    return out;
}

}  // namespace

Report simulate_report(const ScenarioSpec& spec, const Executor& exec, const ReportOptions& opts) {
    const auto start = Clock::now();
    const std::size_t reps = spec.replications;
    const std::size_t steps = spec.grid.steps();
    struct Rep {
        Json summary;
        std::vector<double> m2x, m2xb;
        std::string traj_x, traj_xb;
    };
    std::vector<Rep> out(reps);
    exec.for_each(reps, [&](std::size_t r) {
        const RunResult res = run(spec, r, exec, RunOptions{true});
        const ParticleCloud& c = res.cloud;
        const std::size_t last = spec.grid.lags() + c.steps_done();
        Json mean_x = Json::array(), mean_xb = Json::array();
        for (std::size_t i = 0; i < c.dim(); ++i) {
            double sx = 0.0, sxb = 0.0;
            for (std::size_t p = 0; p < c.size(); ++p) {
                sx += c.value(System::X, p, last, i);
                sxb += c.value(System::Xbar, p, last, i);
            }
            mean_x.push_back(sx / static_cast<double>(c.size()));
            mean_xb.push_back(sxb / static_cast<double>(c.size()));
        }
        const auto stat = violation_stat(c);
        out[r].summary = Json{{"replication", r},
                              {"seed", res.seed},
                              {"final_mean_x", std::move(mean_x)},
                              {"final_mean_xbar", std::move(mean_xb)},
                              {"max_second_moment_x", *std::max_element(res.second_moment_x.begin(),
                                                                        res.second_moment_x.end())},
                              {"max_second_moment_xbar", *std::max_element(res.second_moment_xbar.begin(),
                                                                           res.second_moment_xbar.end())},
                              {"max_violation", *std::max_element(stat.begin(), stat.end())}};
        out[r].m2x = res.second_moment_x;
        out[r].m2xb = res.second_moment_xbar;
        if (opts.trajectories && r == 0) {
            out[r].traj_x = trajectory_csv(c, System::X);
            out[r].traj_xb = trajectory_csv(c, System::Xbar);
        }
    });

    Report rep;
    rep.body = base("simulate", spec);
    Json list = Json::array();
    for (auto& r : out) list.push_back(std::move(r.summary));
    rep.body["replications"] = std::move(list);
    rep.body["model_hash"] = spec.resolved["models"]["system"]["hash"];
    rep.body["model_bar_hash"] = spec.resolved["models"]["system_bar"]["hash"];

    // Replication-averaged E||X_t||^2 per step.
    rep.csv = "time,second_moment_x,second_moment_xbar\n";
    for (std::size_t k = 0; k <= steps; ++k) {
        double a = 0.0, b = 0.0;
        for (const auto& r : out) {
            a += r.m2x[k];
            b += r.m2xb[k];
        }
        rep.csv += csv_number(spec.grid.time_at_step(k)) + "," + csv_number(a / static_cast<double>(reps)) + "," +
                   csv_number(b / static_cast<double>(reps)) + "\n";
    }
    rep.artifacts.push_back({"second_moment.csv", rep.csv});
    if (opts.trajectories) {
        rep.artifacts.push_back({"trajectories_x.csv", std::move(out[0].traj_x)});
        rep.artifacts.push_back({"trajectories_xbar.csv", std::move(out[0].traj_xb)});
    }
    stamp(rep, opts, start);
    return rep;
}

Report order_test_report(const ScenarioSpec& spec, const Executor& exec, const ReportOptions& opts) {
    const auto start = Clock::now();
    TrialOptions topts;
    topts.psi_trace = opts.psi_trace || spec.trace.psi_trace;
    topts.psi_n = spec.trace.psi_n;
    const TrialReport t = run_preservation_trial(spec, exec, topts);

    Report rep;
    rep.body = base("order-test", spec);
    Json reps = Json::array();
    rep.csv = "replication,seed,max,p95,violating_fraction\n";
    for (const auto& r : t.replications) {
        const std::uint64_t seed = replication_seed(spec.sim.seed, r.replication);
        reps.push_back(Json{{"replication", r.replication},
                            {"seed", seed},
                            {"max", r.max},
                            {"p95", r.p95},
                            {"violating_fraction", r.violating_fraction}});
        rep.csv += std::to_string(r.replication) + "," + std::to_string(seed) + "," + csv_number(r.max) + "," +
                   csv_number(r.p95) + "," + csv_number(r.violating_fraction) + "\n";
    }
    rep.body["replications"] = std::move(reps);
    rep.body["violation_stat"] = Json{{"max", t.max},   {"p95", t.p95},         {"median", t.median},
                                      {"mean", t.mean}, {"samples", t.samples}, {"tolerance", t.tolerance}};
    rep.body["violating_fraction"] = t.violating_fraction;
    rep.body["order_preserved"] = t.violating_fraction == 0.0;
    if (topts.psi_trace) {
        std::string csv = "time,psi_functional\n";
        for (std::size_t k = 0; k < t.psi_trace.size(); ++k) {
            csv += csv_number(t.psi_times[k]) + "," + csv_number(t.psi_trace[k]) + "\n";
        }
        rep.body["psi"] = Json{{"n", t.psi_n}, {"final", t.psi_trace.back()},
                               {"max", *std::max_element(t.psi_trace.begin(), t.psi_trace.end())}};
        rep.artifacts.push_back({"psi_trace.csv", std::move(csv)});
    }
    rep.artifacts.push_back({"replications.csv", rep.csv});
    rep.flagged = t.violating_fraction > 0.0;
    stamp(rep, opts, start);
    return rep;
}

Report necessity_report(const ScenarioSpec& spec, const Executor& exec, const ReportOptions& opts) {
    const auto start = Clock::now();
    if (!spec.necessity) throw ConfigError("necessity", "scenario has no [necessity] section");
    const DriftGapReport g = drift_gap_probe(spec, spec.necessity->s_steps, exec);

    Report rep;
    rep.body = base("necessity-probe", spec);
    rep.body["coordinate"] = g.coordinate + 1;
    rep.body["particles"] = g.particles;
    rep.body["tagged"] = g.tagged;
    rep.body["drift"] = g.drift;
    rep.body["drift_bar"] = g.drift_bar;
    rep.body["direct_gap"] = g.direct_gap;
    Json pts = Json::array();
    rep.csv = "s,steps,mean,std_error,direct_gap\n";
    for (const auto& p : g.points) {
        pts.push_back(Json{{"s", p.s},
                           {"steps", p.steps},
                           {"mean", p.mean},
                           {"std_error", p.std_error},
                           {"z_vs_direct", p.std_error > 0.0 ? (p.mean - g.direct_gap) / p.std_error : 0.0}});
        rep.csv += csv_number(p.s) + "," + std::to_string(p.steps) + "," + csv_number(p.mean) + "," +
                   csv_number(p.std_error) + "," + csv_number(g.direct_gap) + "\n";
    }
    rep.body["points"] = std::move(pts);
    // Positive gap at the smallest s beyond three standard errors witnesses a
    // failure of the drift condition.
    const auto smallest = std::min_element(g.points.begin(), g.points.end(),
                                           [](const auto& a, const auto& b) { return a.s < b.s; });
    const bool witnessed = smallest->mean - 3.0 * smallest->std_error > spec.violation_tol;
    rep.body["drift_violation_witnessed"] = witnessed;
    rep.artifacts.push_back({"drift_gap.csv", rep.csv});
    rep.flagged = witnessed;
    stamp(rep, opts, start);
    return rep;
}

Report conditions_report(const ScenarioSpec& spec, const Executor& exec, const ReportOptions& opts) {
    const auto start = Clock::now();
    const ConditionReport c = check_conditions(spec.model, spec.model_bar, spec.grid, spec.probes, exec);

    Report rep;
    rep.body = base("check-conditions", spec);
    rep.body["alpha_hat"] = c.alpha_hat;
    rep.body["h1_probes_used"] = c.h1_probes_used;
    Json h2 = Json::array();
    for (std::size_t k = 0; k < c.h2_times.size(); ++k) h2.push_back(Json{{"t", c.h2_times[k]}, {"value", c.k_hat[k]}});
    rep.body["h2"] = std::move(h2);

    std::map<std::string, std::size_t> counts{{"drift-order", 0}, {"sigma-equality", 0}, {"sigma-structure", 0}};
    Json list = Json::array();
    Json witnesses = Json::array();
    rep.csv = "kind,probe,coordinate,noise,t,lhs,rhs,gap\n";
    for (const auto& v : c.violations) {
        const std::string kind = to_string(v.kind);
        ++counts[kind];
        const bool diffusion = v.kind != ViolationKind::DriftOrder;
        Json item{{"kind", kind}, {"probe", v.probe}, {"coordinate", v.coordinate + 1}, {"t", v.t},
                  {"lhs", v.lhs}, {"rhs", v.rhs}, {"gap", v.gap}};
        item["noise"] = diffusion ? Json(v.noise + 1) : Json(nullptr);
        list.push_back(std::move(item));
        rep.csv += kind + "," + std::to_string(v.probe) + "," + std::to_string(v.coordinate + 1) + "," +
                   (diffusion ? std::to_string(v.noise + 1) : std::string()) + "," + csv_number(v.t) + "," +
                   csv_number(v.lhs) + "," + csv_number(v.rhs) + "," + csv_number(v.gap) + "\n";
        if (witnesses.size() < opts.witness_limit) {
            witnesses.push_back(Json{{"kind", kind},
                                     {"probe", v.probe},
                                     {"xi", segment_json(v.xi, spec.grid.dt(), spec.grid.r0())},
                                     {"eta", segment_json(v.eta, spec.grid.dt(), spec.grid.r0())},
                                     {"mu", measure_segments(v.mu, spec)},
                                     {"nu", measure_segments(v.nu, spec)}});
        }
    }
    rep.body["violation_counts"] = counts;
    rep.body["violations"] = std::move(list);
    rep.body["witnesses"] = std::move(witnesses);
    rep.body["witnesses_truncated"] = c.violations.size() > opts.witness_limit;
    rep.body["conditions_hold"] = c.violations.empty();
    rep.artifacts.push_back({"violations.csv", rep.csv});
    rep.flagged = !c.violations.empty();
    stamp(rep, opts, start);
    return rep;
}

Report psi_table_report(const std::vector<std::size_t>& ns, double lo, double hi, std::size_t points) {
    if (ns.empty()) throw DomainError("psi-table: no n values");
    if (points < 2) throw DomainError("psi-table: points must be >= 2");
    if (!(hi > lo)) throw DomainError("psi-table: need lo < hi");
    Report rep;
    rep.body = Json{{"command", "psi-table"}, {"lo", lo}, {"hi", hi}, {"points", points}};
    Json tables = Json::array();
    rep.csv = "n,s,psi,d1,d2,g\n";
    for (std::size_t n : ns) {
        Json rows = Json::array();
        for (std::size_t k = 0; k < points; ++k) {
            const double s = k + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
            const PsiValue v = psi(n, s);
            // g_n is reported on its domain s <= 0 only.
            const bool has_g = s <= 0.0;
            const double gv = has_g ? g(n, s) : 0.0;
            rows.push_back(Json{{"s", s}, {"psi", v.value}, {"d1", v.d1}, {"d2", v.d2},
                                {"g", has_g ? Json(gv) : Json(nullptr)}});
            rep.csv += std::to_string(n) + "," + csv_number(s) + "," + csv_number(v.value) + "," + csv_number(v.d1) +
                       "," + csv_number(v.d2) + "," + (has_g ? csv_number(gv) : std::string()) + "\n";
        }
        tables.push_back(Json{{"n", n}, {"rows", std::move(rows)}});
    }
    rep.body["tables"] = std::move(tables);
    return rep;
}

Report w2_report(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    Report rep;
    const double v = w2(mu, nu);
    rep.body = Json{{"w2", v}};
    rep.csv = "w2\n" + csv_number(v) + "\n";
    return rep;
}

Report dominance_report(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    Report rep;
    const DominanceWitness w = stochastic_leq(mu, nu);
    rep.body = Json{{"holds", w.holds}};
    rep.csv = "left,right\n";
    if (w.matching) {
        Json m = Json::array();
        for (std::size_t i = 0; i < w.matching->size(); ++i) {
            m.push_back(Json{{"left", i}, {"right", (*w.matching)[i]}});
            rep.csv += std::to_string(i) + "," + std::to_string((*w.matching)[i]) + "\n";
        }
        rep.body["matching"] = std::move(m);
    } else {
        rep.body["matching"] = nullptr;
    }
    return rep;
}

}  // namespace pdsde
