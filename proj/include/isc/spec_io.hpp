// JSON spec files.
//
// Population spec:
//   { "types": ["..."], "rho": float, "d": int,
//     "peers": [ { "K": int, "M": float, "g": [floats], "h": [floats] } ] }
// Scenario spec:
//   { "kind": "zipf_perfect" | "zipf_shift", "beta": float, "s_max": int,
//     "delta": int, "direction": "supply_lead" | "demand_lead",
//     "N": int, "k": float, "rho": float, "d": int }
//
// Distributions must sum to 1 within 1e-6 and are renormalized on load.
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "isc/domain.hpp"
#include "isc/scenarios.hpp"

namespace isc {

inline constexpr double kSpecSumTolerance = 1e-6;

// Malformed or invalid spec. what() carries "source:line:column: message" for
// syntax errors and "source: at /json/pointer: message" for invalid values.
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PopulationSpec {
    Population population;
    ClubParams params;
};

using Spec = std::variant<PopulationSpec, ScenarioSpec>;

PopulationSpec parse_population_spec(std::string_view text, const std::string& source = "<input>");
ScenarioSpec parse_scenario_spec(std::string_view text, const std::string& source = "<input>");

// Dispatches on the presence of "peers" (population) or "kind" (scenario).
Spec parse_spec(std::string_view text, const std::string& source = "<input>");
Spec load_spec(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

} // namespace isc
