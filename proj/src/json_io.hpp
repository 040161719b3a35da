#pragma once

// Private JSON helpers shared by the model and report writers.

#include <json.hpp>

#include "mcivoice/classifiers.hpp"
#include "mcivoice/evaluation.hpp"

namespace mcivoice::detail {

nlohmann::json spec_to_json(const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json report_json(const EvaluationReport& report, const std::string& config_hash);

}  // namespace mcivoice::detail
