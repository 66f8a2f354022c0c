// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string>

#include "oobt/sim.hpp"

namespace oobt {

// Parses and validates a scenario description. Throws ScenarioError with a
// field-path diagnostic (e.g. "scenario.servers[0].address: expected an
// IPv4/IPv6 literal") on any schema violation. See docs/scenario-format.md
// for the schema.
ScenarioConfig load_scenario_json(const std::string& json_text);
ScenarioConfig load_scenario_file(const std::string& path);

} // namespace oobt
