#pragma once

#include <string>

#include <json.hpp>

#include "grls/evaluation.hpp"
#include "grls/loss.hpp"
#include "grls/rls_core.hpp"
#include "grls/selection.hpp"
#include "grls/text_io.hpp"

namespace grls {

// Model layout: {"lambda": .., "selected": [ints], "weights": [floats]}.
nlohmann::json to_json(const RlsModel& model);
RlsModel model_from_json(const nlohmann::json& j);

// Trace layout: {"lambda", "loss", "steps": [{"feature", "loo_error"}...],
// "model": {...}}.
nlohmann::json trace_to_json(const SelectionTrace& trace, Loss loss);
SelectionTrace trace_from_json(const nlohmann::json& j);

nlohmann::json curve_to_json(const CurveReport& report);
// Tidy rows: fold,k,lambda,test_accuracy,loo_accuracy.
std::string curve_to_csv(const CurveReport& report);

nlohmann::json scaling_to_json(const ScalingReport& report);
// Tidy rows: algorithm,m,n,k,wall_seconds.
std::string scaling_to_csv(const ScalingReport& report);

}  // namespace grls
