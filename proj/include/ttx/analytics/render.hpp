#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ttx/analytics/metrics.hpp"

namespace ttx::analytics {

// Machine-readable report; same data model as ExerciseReport. Absent values
// are omitted rather than written as null.
nlohmann::ordered_json ToJson(const ExerciseReport& report);

// Human-readable summary: a per-team table, per-milestone timings and tool
// error rates.
std::string RenderText(const ExerciseReport& report);

}  // namespace ttx::analytics
