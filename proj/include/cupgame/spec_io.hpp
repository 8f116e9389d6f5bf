#pragma once

#include "cupgame/harness.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cupgame {

/// Experiment specs as JSON. Rationals travel as "a/b" strings, unit counts
/// as integers (decimal strings past 64 bits), and "resolution": "auto"
/// asks the harness to choose D.
ExperimentSpec spec_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json spec_to_json(const ExperimentSpec& spec);

ExperimentSpec load_spec_file(const std::string& path);

/// Applies "a.b.c=value" overrides to a spec document. Only paths the
/// document already has are accepted, except under "params".
void apply_overrides(nlohmann::ordered_json& doc, const std::vector<std::string>& overrides);

/// A spec document with every field at its default.
nlohmann::ordered_json default_spec_json();

}  // namespace cupgame
