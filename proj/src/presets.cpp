#include "netcbc/presets.hpp"

#include "netcbc/error.hpp"

namespace netcbc {

nlohmann::json rlc_preset_json() {
  const double rho = 0.05, R = 2.0, L = 9.0, C = 0.5;
  using nlohmann::json;
  auto box = [](json lo, json hi) { return json{{"lower", std::move(lo)}, {"upper", std::move(hi)}}; };
  return {
      {"system",
       {{"A", {{1.0 - rho * R / L, -rho / L}, {rho / C, 1.0}}},
        {"B", {{1.0, 0.0}, {0.0, 1.0}}},
        {"noise_var", {0.1, 0.1}}}},
      {"channel", {{"tau", 3}, {"p_theta", 0.93}, {"q_phi", 0.90}}},
      {"safety",
       {{"X", box({-6.0, -4.0}, {6.0, 4.0})},
        {"X0", box({-0.4, -0.4}, {0.4, 0.4})},
        {"X1", json::array({box({-6.0, -4.0}, {-4.0, -2.5}), box({4.0, 2.5}, {6.0, 4.0})})},
        {"U", box({-1.0, -1.0}, {1.0, 1.0})},
        {"T", 100}}},
  };
}

nlohmann::json preset_json(const std::string& name) {
  if (name == "rlc") return rlc_preset_json();
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace netcbc
