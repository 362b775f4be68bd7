#pragma once

#include <string>

#include <json.hpp>

#include "pdsde/measures.hpp"
#include "pdsde/segments.hpp"

namespace pdsde {

using Json = nlohmann::json;

// Lag spacing carried alongside serialized segments.
struct LagSpacing {
    double dt = 1.0;
    double r0 = 0.0;
};

Json parse_json_text(const std::string& text);

Json segment_json(const PathSegment& seg, double dt, double r0);
// Accepts {"dim", "values"} with optional "dt"/"r0"; spacing receives them when given.
PathSegment segment_from_json_value(const Json& j, LagSpacing* spacing = nullptr);

Json measure_json(const EmpiricalMeasure& mu, LagSpacing spacing);
EmpiricalMeasure measure_from_json(const Json& j, LagSpacing* spacing = nullptr);

Json weighted_measure_json(const WeightedMeasure& mu, LagSpacing spacing);

Json coupling_json(const Coupling& pi, LagSpacing spacing);
Coupling coupling_from_json(const Json& j, LagSpacing* spacing = nullptr);

std::string read_text_file(const std::string& path);

}  // namespace pdsde
