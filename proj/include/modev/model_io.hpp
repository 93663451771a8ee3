#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modev/model.hpp"

namespace modev {

/// Builds a model from a JSON document:
///   {"id", "dimension", "x0", "drift": {"name", ...}, "kernel": {"name", ...},
///    "gamma", "bounds": {"K_b", "K_A", "K_mgf", "lambda", "probe_radius"}}
/// Drifts: zero | constant{value} | linear{matrix, offset} | ou{theta} |
///         tanh{scale} | square.
/// Kernels: gaussian{variance | covariance} | rademacher | discrete{atoms, probs} |
///          product{factors: [{name: gaussian|rademacher|point_mass, variance}]} |
///          point_mass | exponential.
/// Unknown keys are rejected with ConfigError.
ModelSpec model_from_json(const nlohmann::json& doc);

/// Built-in models by id (gauss1, ou1, rad1, degen2, zero1, exp1, tanh1, osc2).
ModelSpec catalog_model(const std::string& id);
std::vector<std::string> catalog_model_ids();

/// Catalog id, or a path to a model JSON file.
ModelSpec load_model(const std::string& id_or_path);

}  // namespace modev
