#pragma once

#include <string>

#include <json.hpp>

namespace netcbc {

/// Series RLC circuit discretized with step 0.05 (R = 2, L = 9, C = 0.5),
/// delay 3, link success 0.93 / 0.90, horizon 100. The input box U = [-1, 1]^2
/// is an assumption; the source example does not state one.
nlohmann::json rlc_preset_json();

/// Looks up a preset by name; throws ConfigError for unknown names.
nlohmann::json preset_json(const std::string& name);

}  // namespace netcbc
