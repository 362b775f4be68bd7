#include "pdsde/pdsde.h"

#include <exception>
#include <new>
#include <string>
#include <utility>

#include "pdsde/error.hpp"
#include "pdsde/executor.hpp"
#include "pdsde/json_io.hpp"
#include "pdsde/reports.hpp"
#include "pdsde/scenario.hpp"

struct pdsde_scenario {
    pdsde::ScenarioSpec spec;
    std::string json;
    std::string hash;

    explicit pdsde_scenario(pdsde::ScenarioSpec s) : spec(std::move(s)) { refresh(); }
    void refresh() {
        json = spec.resolved.dump();
        hash = spec.resolved["models"]["system"]["hash"].get<std::string>();
    }
};

struct pdsde_measure {
    pdsde::EmpiricalMeasure mu;
};

struct pdsde_result {
    pdsde::Report report;
    std::string json;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_key;

pdsde_status fail(pdsde_status s, const std::string& msg, const std::string& key = {}) {
    last_error = msg;
    last_key = key;
    return s;
}

template <class F>
pdsde_status guarded(F&& f) {
    last_error.clear();
    last_key.clear();
    try {
        f();
        return PDSDE_OK;
    } catch (const pdsde::ConfigError& e) {
        return fail(PDSDE_ERR_CONFIG, e.what(), e.key());
    } catch (const pdsde::ParseError& e) {
        return fail(PDSDE_ERR_PARSE, e.what());
    } catch (const pdsde::IoError& e) {
        return fail(PDSDE_ERR_IO, e.what());
    } catch (const pdsde::DimensionError& e) {
        return fail(PDSDE_ERR_DIMENSION, e.what());
    } catch (const pdsde::DomainError& e) {
        return fail(PDSDE_ERR_DOMAIN, e.what());
    } catch (const pdsde::NumericError& e) {
        return fail(PDSDE_ERR_NUMERIC, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(PDSDE_ERR_PARSE, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PDSDE_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PDSDE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PDSDE_ERR_INTERNAL, "unknown error");
    }
}

pdsde::ReportOptions report_options(const pdsde_options* o) {
    pdsde::ReportOptions r;
    if (o) {
        r.timing = o->timing != 0;
        r.trajectories = o->trajectories != 0;
        r.psi_trace = o->psi_trace != 0;
    }
    return r;
}

std::size_t threads_of(const pdsde_options* o) { return o && o->threads > 1 ? o->threads : 1; }

void emit(pdsde::Report rep, pdsde_result** out) {
    auto* r = new pdsde_result{std::move(rep), {}};
    r->json = r->report.body.dump();
    *out = r;
}

using Command = pdsde::Report (*)(const pdsde::ScenarioSpec&, const pdsde::Executor&, const pdsde::ReportOptions&);

pdsde_status run_command(Command cmd, const pdsde_scenario* sc, const pdsde_options* opts, pdsde_result** out) {
    if (!sc || !out) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const pdsde::Executor exec(threads_of(opts));
        emit(cmd(sc->spec, exec, report_options(opts)), out);
    });
}

}  // namespace

extern "C" {

const char* pdsde_version(void) { return "1.0.0"; }

const char* pdsde_status_name(pdsde_status status) {
    switch (status) {
    case PDSDE_OK: return "ok";
    case PDSDE_ERR_ARGUMENT: return "argument";
    case PDSDE_ERR_IO: return "io";
    case PDSDE_ERR_PARSE: return "parse";
    case PDSDE_ERR_CONFIG: return "config";
    case PDSDE_ERR_DIMENSION: return "dimension";
    case PDSDE_ERR_DOMAIN: return "domain";
    case PDSDE_ERR_NUMERIC: return "numeric";
    case PDSDE_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* pdsde_last_error(void) { return last_error.c_str(); }
const char* pdsde_last_error_key(void) { return last_key.c_str(); }

void pdsde_options_init(pdsde_options* opts) {
    if (opts) *opts = pdsde_options{1, 0, 0, 0};
}

pdsde_status pdsde_scenario_load(const char* path, pdsde_scenario** out) {
    if (!path || !out) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new pdsde_scenario(pdsde::load_scenario(path)); });
}

pdsde_status pdsde_scenario_parse(const char* text, const char* base_dir, pdsde_scenario** out) {
    if (!text || !out) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new pdsde_scenario(pdsde::parse_scenario(text, base_dir ? base_dir : ".")); });
}

pdsde_status pdsde_scenario_set_seed(pdsde_scenario* scenario, uint64_t seed) {
    if (!scenario) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        pdsde::override_seed(scenario->spec, seed);
        scenario->refresh();
    });
}

const char* pdsde_scenario_json(const pdsde_scenario* scenario) { return scenario ? scenario->json.c_str() : ""; }
const char* pdsde_scenario_model_hash(const pdsde_scenario* scenario) {
    return scenario ? scenario->hash.c_str() : "";
}
void pdsde_scenario_free(pdsde_scenario* scenario) { delete scenario; }

pdsde_status pdsde_measure_load(const char* path, pdsde_measure** out) {
    if (!path || !out) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        *out = new pdsde_measure{pdsde::measure_from_json(pdsde::parse_json_text(pdsde::read_text_file(path)))};
    });
}

pdsde_status pdsde_measure_parse(const char* json, pdsde_measure** out) {
    if (!json || !out) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new pdsde_measure{pdsde::measure_from_json(pdsde::parse_json_text(json))}; });
}

size_t pdsde_measure_size(const pdsde_measure* measure) { return measure ? measure->mu.size() : 0; }
void pdsde_measure_free(pdsde_measure* measure) { delete measure; }

pdsde_status pdsde_w2(const pdsde_measure* mu, const pdsde_measure* nu, double* out) {
    if (!mu || !nu || !out) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    return guarded([&] { *out = pdsde::w2(mu->mu, nu->mu); });
}

pdsde_status pdsde_dominance(const pdsde_measure* mu, const pdsde_measure* nu, int* holds, size_t* matching) {
    if (!mu || !nu || !holds) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const pdsde::DominanceWitness w = pdsde::stochastic_leq(mu->mu, nu->mu);
        *holds = w.holds ? 1 : 0;
        if (matching && w.matching) {
            for (std::size_t i = 0; i < w.matching->size(); ++i) matching[i] = (*w.matching)[i];
        }
    });
}

pdsde_status pdsde_simulate(const pdsde_scenario* scenario, const pdsde_options* opts, pdsde_result** out) {
    return run_command(&pdsde::simulate_report, scenario, opts, out);
}

pdsde_status pdsde_order_test(const pdsde_scenario* scenario, const pdsde_options* opts, pdsde_result** out) {
    return run_command(&pdsde::order_test_report, scenario, opts, out);
}

pdsde_status pdsde_necessity_probe(const pdsde_scenario* scenario, const pdsde_options* opts, pdsde_result** out) {
    return run_command(&pdsde::necessity_report, scenario, opts, out);
}

pdsde_status pdsde_check_conditions(const pdsde_scenario* scenario, const pdsde_options* opts,
                                    pdsde_result** out) {
    return run_command(&pdsde::conditions_report, scenario, opts, out);
}

pdsde_status pdsde_psi_table(const size_t* ns, size_t count, double lo, double hi, size_t points,
                             pdsde_result** out) {
    if (!out || (count > 0 && !ns)) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { emit(pdsde::psi_table_report(std::vector<std::size_t>(ns, ns + count), lo, hi, points), out); });
}

pdsde_status pdsde_w2_report(const pdsde_measure* mu, const pdsde_measure* nu, pdsde_result** out) {
    if (!mu || !nu || !out) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { emit(pdsde::w2_report(mu->mu, nu->mu), out); });
}

pdsde_status pdsde_dominance_report(const pdsde_measure* mu, const pdsde_measure* nu, pdsde_result** out) {
    if (!mu || !nu || !out) return fail(PDSDE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { emit(pdsde::dominance_report(mu->mu, nu->mu), out); });
}

const char* pdsde_result_json(const pdsde_result* result) { return result ? result->json.c_str() : ""; }
const char* pdsde_result_csv(const pdsde_result* result) { return result ? result->report.csv.c_str() : ""; }
int pdsde_result_flagged(const pdsde_result* result) { return result && result->report.flagged ? 1 : 0; }

size_t pdsde_result_artifact_count(const pdsde_result* result) {
    return result ? result->report.artifacts.size() : 0;
}

const char* pdsde_result_artifact_name(const pdsde_result* result, size_t index) {
    if (!result || index >= result->report.artifacts.size()) return nullptr;
    return result->report.artifacts[index].name.c_str();
}

const char* pdsde_result_artifact_data(const pdsde_result* result, size_t index) {
    if (!result || index >= result->report.artifacts.size()) return nullptr;
    return result->report.artifacts[index].content.c_str();
}

void pdsde_result_free(pdsde_result* result) { delete result; }

}  // extern "C"
