#include "pdsde/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "pdsde/error.hpp"
#include "pdsde/orderlab.hpp"
#include "pdsde/rng.hpp"
#include "pdsde/tomlite.hpp"

namespace pdsde {

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"grid", {"t0", "T", "dt", "r0"}},
        {"dims", {"d", "m"}},
        {"models", {"b", "bbar", "sigma", "sigmabar"}},
        {"initial", {"type", "kind", "path", "xi", "eta", "atoms", "mean", "sd", "gap_min", "gap_sd", "path_sd",
                     "seed"}},
        {"sim", {"N", "seed", "replications", "antithetic", "violation_tol"}},
        {"probes", {"num_probes", "tolerance", "law_size", "seg_scale", "time_points", "seed"}},
        {"trace", {"psi_n", "psi_trace"}},
        {"necessity", {"coordinate", "eps", "xi", "eta", "mu_file", "nu_file", "law_atoms", "law_mean", "law_sd",
                       "law_shift", "law_seed", "s_steps"}},
    };
    return keys;
}

// Typed access to one table of the document with key-qualified errors.
class Table {
public:
    Table(const Json& doc, std::string name) : name_(std::move(name)) {
        if (doc.contains(name_)) j_ = &doc.at(name_);
    }

    bool present() const { return j_ != nullptr; }
    bool has(const std::string& key) const { return j_ && j_->contains(key); }
    std::string key(const std::string& k) const { return name_ + "." + k; }

    const Json& raw(const std::string& k) const {
        if (!has(k)) throw ConfigError(key(k), "missing required key");
        return j_->at(k);
    }

    double number(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_number()) throw ConfigError(key(k), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(key(k), "must be finite");
        return x;
    }
    double number(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }

    std::int64_t integer(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t integer(const std::string& k, std::int64_t fallback) const { return has(k) ? integer(k) : fallback; }

    std::size_t count(const std::string& k, std::size_t min) const {
        const std::int64_t v = integer(k);
        if (v < static_cast<std::int64_t>(min)) throw ConfigError(key(k), "must be >= " + std::to_string(min));
        return static_cast<std::size_t>(v);
    }
    std::size_t count(const std::string& k, std::size_t min, std::size_t fallback) const {
        return has(k) ? count(k, min) : fallback;
    }

    std::uint64_t seed(const std::string& k, std::uint64_t fallback) const {
        if (!has(k)) return fallback;
        const std::int64_t v = integer(k);
        if (v < 0) throw ConfigError(key(k), "must be >= 0");
        return static_cast<std::uint64_t>(v);
    }

    bool boolean(const std::string& k, bool fallback) const {
        if (!has(k)) return fallback;
        const Json& v = raw(k);
        if (!v.is_boolean()) throw ConfigError(key(k), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_string()) throw ConfigError(key(k), "expected a string");
        return v.get<std::string>();
    }

    std::vector<std::string> strings(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_array()) throw ConfigError(key(k), "expected an array of strings");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string()) throw ConfigError(key(k), "expected an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    std::vector<std::vector<std::string>> string_matrix(const std::string& k) const {
        const Json& v = raw(k);
        if (!v.is_array()) throw ConfigError(key(k), "expected an array of string arrays");
        std::vector<std::vector<std::string>> out;
        for (const auto& row : v) {
            if (!row.is_array()) throw ConfigError(key(k), "expected an array of string arrays");
            std::vector<std::string> r;
            for (const auto& e : row) {
                if (!e.is_string()) throw ConfigError(key(k), "expected an array of string arrays");
                r.push_back(e.get<std::string>());
            }
            out.push_back(std::move(r));
        }
        return out;
    }

    std::vector<double> numbers(const std::string& k) const {
        const Json& v = raw(k);
        if (v.is_number()) return {v.get<double>()};
        if (!v.is_array()) throw ConfigError(key(k), "expected a number or an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(key(k), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    // Per-coordinate vector; a scalar broadcasts to all d coordinates.
    std::vector<double> per_coord(const std::string& k, std::size_t d) const {
        auto v = numbers(k);
        if (v.size() == 1 && d > 1) v.assign(d, v[0]);
        if (v.size() != d) throw ConfigError(key(k), "expected " + std::to_string(d) + " values (one per coordinate)");
        return v;
    }
    std::vector<double> per_coord(const std::string& k, std::size_t d, double fallback) const {
        return has(k) ? per_coord(k, d) : std::vector<double>(d, fallback);
    }

private:
    std::string name_;
    const Json* j_ = nullptr;
};

void reject_unknown(const Json& doc) {
    const auto& allowed = allowed_keys();
    for (const auto& [section, body] : doc.items()) {
        const auto it = allowed.find(section);
        if (it == allowed.end()) throw ConfigError(section, "unknown section");
        for (const auto& [k, v] : body.items()) {
            if (!it->second.count(k)) throw ConfigError(section + "." + k, "unknown key");
        }
    }
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
    const std::filesystem::path path(p);
    if (path.is_absolute()) return p;
    return (std::filesystem::path(base_dir) / path).string();
}

CoeffExpr parse_entry(const std::string& key, const std::string& src, std::size_t d, const TimeGrid& grid) {
    try {
        return parse_coeff(src, d, grid);
    } catch (const ParseError& e) {
        throw ConfigError(key, e.what());
    }
}

CoeffModel parse_model(const Table& t, const std::string& drift_key, const std::string& diff_key, std::size_t d,
                       std::size_t m, const TimeGrid& grid) {
    const auto b = t.strings(drift_key);
    if (b.size() != d) throw ConfigError(t.key(drift_key), "expected " + std::to_string(d) + " drift expressions");
    const auto s = t.string_matrix(diff_key);
    if (s.size() != d) throw ConfigError(t.key(diff_key), "expected " + std::to_string(d) + " rows");
    std::vector<CoeffExpr> drift, diffusion;
    for (std::size_t i = 0; i < d; ++i) {
        drift.push_back(parse_entry(t.key(drift_key) + "[" + std::to_string(i + 1) + "]", b[i], d, grid));
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (s[i].size() != m) {
            throw ConfigError(t.key(diff_key) + "[" + std::to_string(i + 1) + "]",
                              "expected " + std::to_string(m) + " entries");
        }
        for (std::size_t j = 0; j < m; ++j) {
            diffusion.push_back(parse_entry(
                t.key(diff_key) + "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]", s[i][j], d, grid));
        }
    }
    return CoeffModel(d, m, std::move(drift), std::move(diffusion));
}

PathSegment constant_segment(const std::vector<double>& v, std::size_t cols) {
    return PathSegment::constant(std::span<const double>(v), cols);
}

// Pairs (xi_k, eta_k): constant histories at mean + sd * Z (plus an optional
// random-walk perturbation), eta_k = xi_k + gap_min + gap_sd * |Z'|.
Coupling ordered_builtin(const Table& t, std::size_t d, const TimeGrid& grid, bool diagonal) {
    const std::size_t atoms = t.count("atoms", 1, 64);
    const auto mean = t.per_coord("mean", d, 1.0);
    const auto sd = t.per_coord("sd", d, 0.0);
    const auto gap_min = t.per_coord("gap_min", d, 0.0);
    const auto gap_sd = t.per_coord("gap_sd", d, 0.0);
    const double path_sd = t.number("path_sd", 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        if (sd[i] < 0.0) throw ConfigError(t.key("sd"), "must be >= 0");
        if (gap_min[i] < 0.0) throw ConfigError(t.key("gap_min"), "must be >= 0");
        if (gap_sd[i] < 0.0) throw ConfigError(t.key("gap_sd"), "must be >= 0");
    }
    if (path_sd < 0.0) throw ConfigError(t.key("path_sd"), "must be >= 0");
    rng::Stream stream(t.seed("seed", 0), 0x424C544Eu);
    const std::size_t cols = grid.segment_columns();
    std::vector<CouplingPair> pairs;
    pairs.reserve(atoms);
    const double w = 1.0 / static_cast<double>(atoms);
    for (std::size_t k = 0; k < atoms; ++k) {
        PathSegment xi(d, cols);
        for (std::size_t i = 0; i < d; ++i) {
            const double level = mean[i] + sd[i] * stream.normal();
            double walk = 0.0;
            // Walk runs backwards from the current value so xi(0) = level.
            for (std::size_t j = cols; j-- > 0;) {
                xi(i, j) = level + walk;
                if (path_sd > 0.0) walk += path_sd * std::sqrt(grid.dt()) * stream.normal();
            }
        }
        PathSegment eta = xi;
        if (!diagonal) {
            for (std::size_t i = 0; i < d; ++i) {
                const double shift = gap_min[i] + gap_sd[i] * std::abs(stream.normal());
                for (std::size_t j = 0; j < cols; ++j) eta(i, j) += shift;
            }
        }
        pairs.push_back({std::move(xi), std::move(eta), w});
    }
    return Coupling(std::move(pairs));
}

EmpiricalMeasure load_measure(const Table& t, const std::string& k, const std::string& base_dir,
                              const TimeGrid& grid, std::size_t d) {
    const std::string path = resolve_path(base_dir, t.text(k));
    try {
        EmpiricalMeasure mu = measure_from_json(parse_json_text(read_text_file(path)));
        if (mu.dim() != d || mu.cols() != grid.segment_columns()) {
            throw ConfigError(t.key(k), "measure shape does not match (d, L+1)");
        }
        return mu;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(t.key(k), e.what());
    }
}

NecessitySetup parse_necessity(const Table& t, std::size_t d, const TimeGrid& grid, const std::string& base_dir) {
    const std::size_t cols = grid.segment_columns();
    const std::size_t coord = t.count("coordinate", 1, 1);
    if (coord > d) throw ConfigError(t.key("coordinate"), "out of range [1, d]");
    const double eps = t.number("eps", 0.5);
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError(t.key("eps"), "must lie in (0, 1)");
    PathSegment xi = constant_segment(t.per_coord("xi", d, 1.0), cols);
    PathSegment eta = constant_segment(t.per_coord("eta", d, 1.0), cols);

    std::optional<EmpiricalMeasure> mu, nu;
    if (t.has("mu_file") || t.has("nu_file")) {
        if (!t.has("mu_file") || !t.has("nu_file")) {
            throw ConfigError(t.key(t.has("mu_file") ? "nu_file" : "mu_file"), "mu_file and nu_file go together");
        }
        mu = load_measure(t, "mu_file", base_dir, grid, d);
        nu = load_measure(t, "nu_file", base_dir, grid, d);
    } else {
        const std::size_t atoms = t.count("law_atoms", 1, 32);
        const auto mean = t.per_coord("law_mean", d, 1.0);
        const auto sd = t.per_coord("law_sd", d, 0.2);
        const auto shift = t.per_coord("law_shift", d, 0.1);
        for (double s : shift) {
            if (s < 0.0) throw ConfigError(t.key("law_shift"), "must be >= 0");
        }
        rng::Stream stream(t.seed("law_seed", 0), 0x4C415753u);
        std::vector<PathSegment> a, b;
        for (std::size_t k = 0; k < atoms; ++k) {
            std::vector<double> level(d), upper(d);
            for (std::size_t i = 0; i < d; ++i) {
                level[i] = mean[i] + sd[i] * stream.normal();
                upper[i] = level[i] + shift[i];
            }
            a.push_back(constant_segment(level, cols));
            b.push_back(constant_segment(upper, cols));
        }
        mu.emplace(std::move(a));
        nu.emplace(std::move(b));
    }
    std::vector<std::size_t> s_steps{1, 2, 4};
    if (t.has("s_steps")) {
        s_steps.clear();
        for (double v : t.numbers("s_steps")) {
            if (v < 1.0 || v != std::floor(v)) throw ConfigError(t.key("s_steps"), "entries must be positive integers");
            s_steps.push_back(static_cast<std::size_t>(v));
        }
        if (s_steps.empty()) throw ConfigError(t.key("s_steps"), "must not be empty");
    }
    return NecessitySetup{std::move(xi), std::move(eta), std::move(*mu), std::move(*nu), coord - 1, eps, s_steps};
}

Json probes_json(const ProbeConfig& p) {
    return Json{{"num_probes", p.num_probes}, {"tolerance", p.tolerance}, {"law_size", p.law_size},
                {"seg_scale", p.seg_scale},   {"time_points", p.time_points}, {"seed", p.seed}};
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text, const std::string& base_dir) {
    const Json doc = tomlite::parse(text);
    reject_unknown(doc);

    const Table grid_t(doc, "grid");
    const double t0 = grid_t.number("t0", 0.0);
    const double T = grid_t.number("T");
    const double dt = grid_t.number("dt");
    const double r0 = grid_t.number("r0");
    if (!(dt > 0.0)) throw ConfigError("grid.dt", "must be positive");
    if (r0 < 0.0) throw ConfigError("grid.r0", "must be >= 0");
    if (!(T > t0)) throw ConfigError("grid.T", "must exceed grid.t0");
    std::optional<TimeGrid> grid_opt;
    try {
        grid_opt.emplace(t0, T, dt, r0);
    } catch (const DomainError& e) {
        throw ConfigError("grid.T", e.what());
    }
    const TimeGrid grid = *grid_opt;

    const Table dims(doc, "dims");
    const std::size_t d = dims.count("d", 1);
    const std::size_t m = dims.count("m", 1);

    const Table models(doc, "models");
    CoeffModel model = parse_model(models, "b", "sigma", d, m, grid);
    CoeffModel model_bar = parse_model(models, models.has("bbar") ? "bbar" : "b",
                                       models.has("sigmabar") ? "sigmabar" : "sigma", d, m, grid);

    const Table necessity_t(doc, "necessity");
    std::optional<NecessitySetup> necessity;
    if (necessity_t.present()) necessity = parse_necessity(necessity_t, d, grid, base_dir);

    const Table init(doc, "initial");
    std::optional<Coupling> initial;
    Json initial_json;
    if (init.present() && necessity) {
        throw ConfigError("initial", "not allowed with [necessity], which defines the initial coupling");
    }
    if (init.present()) {
        const std::string type = init.has("type") ? init.text("type") : "builtin";
        if (type == "file") {
            const std::string path = resolve_path(base_dir, init.text("path"));
            try {
                initial = coupling_from_json(parse_json_text(read_text_file(path)));
            } catch (const Error& e) {
                throw ConfigError("initial.path", e.what());
            }
            initial_json = {{"source", "file"}, {"path", init.text("path")}};
        } else if (type == "builtin") {
            const std::string kind = init.has("kind") ? init.text("kind") : "ordered";
            if (kind == "ordered" || kind == "diagonal") {
                initial = ordered_builtin(init, d, grid, kind == "diagonal");
            } else if (kind == "dirac") {
                initial = Coupling({{constant_segment(init.per_coord("xi", d), grid.segment_columns()),
                                     constant_segment(init.per_coord("eta", d), grid.segment_columns()), 1.0}});
            } else {
                throw ConfigError("initial.kind", "unknown builtin '" + kind + "' (ordered, diagonal, dirac)");
            }
            initial_json = {{"source", "builtin"}, {"kind", kind}};
            for (const auto& [k, v] : doc.at("initial").items()) {
                if (k != "type" && k != "kind") initial_json[k] = v;
            }
        } else {
            throw ConfigError("initial.type", "expected \"builtin\" or \"file\"");
        }
        if (initial->dim() != d || initial->cols() != grid.segment_columns()) {
            throw ConfigError("initial", "coupling atoms do not match (d, L+1) = (" + std::to_string(d) + ", " +
                                             std::to_string(grid.segment_columns()) + ")");
        }
    } else if (!necessity) {
        throw ConfigError("initial", "missing section (required unless [necessity] is given)");
    }

    const Table sim_t(doc, "sim");
    SimConfig sim;
    sim.particles = sim_t.count("N", 1);
    sim.seed = sim_t.seed("seed", 0);
    sim.noise_dim = m;
    sim.antithetic = sim_t.boolean("antithetic", false);
    const std::size_t replications = sim_t.count("replications", 1, 1);
    const double violation_tol = sim_t.number("violation_tol", 1e-9);
    if (violation_tol < 0.0) throw ConfigError("sim.violation_tol", "must be >= 0");

    const Table probes_t(doc, "probes");
    ProbeConfig probes;
    probes.num_probes = probes_t.count("num_probes", 1, 1000);
    probes.tolerance = probes_t.number("tolerance", 1e-9);
    probes.law_size = probes_t.count("law_size", 1, 8);
    probes.seg_scale = probes_t.number("seg_scale", 1.0);
    if (!(probes.seg_scale > 0.0)) throw ConfigError("probes.seg_scale", "must be positive");
    if (probes.tolerance < 0.0) throw ConfigError("probes.tolerance", "must be >= 0");
    probes.time_points = probes_t.has("time_points") ? probes_t.numbers("time_points") : std::vector<double>{t0, T};
    probes.time_lo = t0;
    probes.time_hi = T;
    const bool follows = !probes_t.has("seed");
    probes.seed = probes_t.seed("seed", sim.seed);

    const Table trace_t(doc, "trace");
    TraceConfig trace;
    trace.psi_n = trace_t.count("psi_n", 1, 10);
    trace.psi_trace = trace_t.boolean("psi_trace", false);

    Json resolved{
        {"grid",
         {{"t0", t0}, {"T", T}, {"dt", dt}, {"r0", grid.r0()}, {"r0_requested", r0},
          {"r0_adjusted", grid.r0_adjusted()}, {"lags", grid.lags()}, {"steps", grid.steps()}}},
        {"dims", {{"d", d}, {"m", m}}},
        {"sim",
         {{"N", sim.particles}, {"seed", sim.seed}, {"replications", replications}, {"antithetic", sim.antithetic},
          {"violation_tol", violation_tol}}},
        {"probes", probes_json(probes)},
        {"trace", {{"psi_n", trace.psi_n}, {"psi_trace", trace.psi_trace}}},
    };
    auto model_json = [](const CoeffModel& mod) {
        Json b = Json::array(), s = Json::array();
        for (const auto& e : mod.drift()) b.push_back(e.print());
        for (std::size_t i = 0; i < mod.dim(); ++i) {
            Json row = Json::array();
            for (std::size_t j = 0; j < mod.noise_dim(); ++j) row.push_back(mod.diffusion(i, j).print());
            s.push_back(std::move(row));
        }
        return Json{{"b", std::move(b)}, {"sigma", std::move(s)}, {"hash", model_hash(mod)}};
    };
    resolved["models"] = {{"system", model_json(model)}, {"system_bar", model_json(model_bar)}};

    if (initial) {
        initial_json["pairs"] = initial->size();
        initial_json["order_supported"] = initial->order_supported();
        initial_json["hash"] = fnv1a_hex(coupling_json(*initial, {dt, grid.r0()}).dump());
        resolved["initial"] = initial_json;
    }

    ScenarioSpec spec{grid,
                      std::move(model),
                      std::move(model_bar),
                      initial ? std::move(*initial) : Coupling({{PathSegment(d, grid.segment_columns()),
                                                                  PathSegment(d, grid.segment_columns()), 1.0}}),
                      sim,
                      replications,
                      violation_tol,
                      probes,
                      follows,
                      trace,
                      std::move(necessity),
                      std::nullopt,
                      std::move(resolved)};

    if (spec.necessity) {
        const NecessitySetup& n = *spec.necessity;
        try {
            ScenarioSpec built = build_necessity_scenario(spec, n.xi, n.eta, n.mu, n.nu, n.eps, n.coordinate);
            spec.tag = built.tag;
            spec.initial = built.initial;
            spec.resolved["initial"] = built.resolved["initial"];
        } catch (const Error& e) {
            throw ConfigError("necessity", e.what());
        }
        spec.resolved["necessity"] = {{"coordinate", n.coordinate + 1},
                                      {"eps", n.eps},
                                      {"s_steps", n.s_steps},
                                      {"xi", segment_json(n.xi, dt, grid.r0())},
                                      {"eta", segment_json(n.eta, dt, grid.r0())},
                                      {"law_atoms", n.mu.size()}};
    }
    return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError&) {
        throw;
    }
    const std::filesystem::path p(path);
    return parse_scenario(text, p.has_parent_path() ? p.parent_path().string() : ".");
}

void override_seed(ScenarioSpec& spec, std::uint64_t seed) {
    spec.sim.seed = seed;
    if (spec.resolved.is_object()) spec.resolved["sim"]["seed"] = seed;
    if (spec.probe_seed_follows_sim) {
        spec.probes.seed = seed;
        if (spec.resolved.is_object()) spec.resolved["probes"]["seed"] = seed;
    }
}

}  // namespace pdsde
