#pragma once

#include <string>

#include "cmm/error.hpp"

namespace cmm {

// CIL: disjoint class sets per task. DIL: all tasks share one label space.
enum class Scenario { cil, dil };

inline std::string to_string(Scenario s) { return s == Scenario::cil ? "cil" : "dil"; }

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "cil") return Scenario::cil;
    if (s == "dil") return Scenario::dil;
    throw ConfigError("unknown scenario '" + s + "' (expected cil or dil)");
}

} // namespace cmm
