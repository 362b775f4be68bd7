#include "pdsde/json_io.hpp"

#include <fstream>
#include <sstream>

#include "pdsde/error.hpp"

namespace pdsde {

Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
    }
}

Json segment_json(const PathSegment& seg, double dt, double r0) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < seg.dim(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < seg.cols(); ++j) row.push_back(seg(i, j));
        rows.push_back(std::move(row));
    }
    return Json{{"dim", seg.dim()}, {"dt", dt}, {"r0", r0}, {"values", std::move(rows)}};
}

PathSegment segment_from_json_value(const Json& j, LagSpacing* spacing) {
    try {
        if (!j.is_object()) throw DomainError("segment must be a JSON object");
        const std::size_t dim = j.at("dim").get<std::size_t>();
        const Json& rows = j.at("values");
        if (!rows.is_array() || rows.size() != dim || dim == 0) {
            throw DimensionError("segment: values must hold one row per coordinate");
        }
        const std::size_t cols = rows[0].size();
        std::vector<double> values(dim * cols);
        for (std::size_t i = 0; i < dim; ++i) {
            if (rows[i].size() != cols) throw DimensionError("segment: ragged value rows");
            for (std::size_t c = 0; c < cols; ++c) values[c * dim + i] = rows[i][c].get<double>();
        }
        LagSpacing s;
        if (j.contains("dt")) s.dt = j.at("dt").get<double>();
        if (j.contains("r0")) s.r0 = j.at("r0").get<double>();
        if (j.contains("dt") && j.contains("r0") && s.dt > 0.0) {
            const double lags = s.r0 / s.dt;
            if (std::abs(lags - static_cast<double>(cols - 1)) > 1e-9 * std::max(1.0, lags)) {
                throw DimensionError("segment: column count does not match r0/dt + 1");
            }
        }
        if (spacing) *spacing = s;
        return PathSegment(dim, cols, std::move(values));
    } catch (const Json::exception& e) {
        throw DomainError(std::string("segment JSON: ") + e.what());
    }
}

Json measure_json(const EmpiricalMeasure& mu, LagSpacing spacing) {
    Json atoms = Json::array();
    for (const auto& a : mu.atoms()) atoms.push_back(segment_json(a, spacing.dt, spacing.r0));
    return Json{{"shape", {mu.dim(), mu.cols()}}, {"atoms", std::move(atoms)}};
}

EmpiricalMeasure measure_from_json(const Json& j, LagSpacing* spacing) {
    try {
        std::vector<PathSegment> atoms;
        for (const auto& a : j.at("atoms")) atoms.push_back(segment_from_json_value(a, spacing));
        EmpiricalMeasure mu(std::move(atoms));
        if (j.contains("shape")) {
            const auto shape = j.at("shape").get<std::vector<std::size_t>>();
            if (shape.size() != 2 || shape[0] != mu.dim() || shape[1] != mu.cols()) {
                throw DimensionError("measure: declared shape does not match its atoms");
            }
        }
        return mu;
    } catch (const Json::exception& e) {
        throw DomainError(std::string("measure JSON: ") + e.what());
    }
}

Json weighted_measure_json(const WeightedMeasure& mu, LagSpacing spacing) {
    Json atoms = Json::array();
    for (const auto& a : mu.atoms()) atoms.push_back(segment_json(a, spacing.dt, spacing.r0));
    return Json{{"shape", {mu.dim(), mu.cols()}}, {"atoms", std::move(atoms)}, {"weights", mu.weights()}};
}

Json coupling_json(const Coupling& pi, LagSpacing spacing) {
    Json pairs = Json::array();
    for (const auto& p : pi.pairs()) {
        pairs.push_back({{"left", segment_json(p.left, spacing.dt, spacing.r0)},
                         {"right", segment_json(p.right, spacing.dt, spacing.r0)},
                         {"weight", p.weight}});
    }
    return Json{{"pairs", std::move(pairs)}};
}

Coupling coupling_from_json(const Json& j, LagSpacing* spacing) {
    try {
        std::vector<CouplingPair> pairs;
        for (const auto& p : j.at("pairs")) {
            pairs.push_back({segment_from_json_value(p.at("left"), spacing),
                             segment_from_json_value(p.at("right"), spacing), p.at("weight").get<double>()});
        }
        return Coupling(std::move(pairs));
    } catch (const Json::exception& e) {
        throw DomainError(std::string("coupling JSON: ") + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace pdsde
