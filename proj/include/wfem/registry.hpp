#pragma once

#include <string>

#include <json.hpp>

#include "wfem/analysis.hpp"
#include "wfem/fem.hpp"
#include "wfem/nonlinearity.hpp"

namespace wfem {

/// References look like {"name": "...", "params": {...}}; params may be
/// omitted when the entry takes none. Unknown names, unknown parameters and
/// missing parameters raise ValidationError.

ScalarFunction make_scalar_function(const nlohmann::json& ref);
SourceFunction make_source_function(const nlohmann::json& ref);
/// `flux_of` needs the model: f = a(x, grad u) makes u the exact solution
/// with g = 0.
VectorFunction make_vector_function(const nlohmann::json& ref, const Model* model = nullptr);
LinearCoefficient make_coefficient(const nlohmann::json& ref);
NonlinearityPtr make_registered_nonlinearity(const nlohmann::json& ref);

/// Names and parameter schemas of all built-ins, in a fixed order.
nlohmann::ordered_json registry_list();

} // namespace wfem
