#pragma once

#include <string>

#include <json.hpp>

#include "interx/inference.hpp"
#include "interx/panel.hpp"
#include "interx/pipeline.hpp"

namespace interx {

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const SeResult& result);
nlohmann::json to_json(const EstimateResult& result);

/// Plain-text tables for the terminal.
std::string format_estimates(const EstimateResult& result);
std::string format_validation(const ValidationReport& report);

}  // namespace interx
