#ifndef SWARMSYNC_SCENARIOS_HPP
#define SWARMSYNC_SCENARIOS_HPP

#include <string>
#include <vector>

#include "swarmsync/netsim.hpp"

namespace swarmsync {

// Canonical scenarios, fully specified and deterministic; fields left free
// (phases, offsets) resolve from the scenario seed. Throws
// std::invalid_argument for an unknown name.
Scenario canned_scenario(const std::string& name);

const std::vector<std::string>& canned_scenario_names();

}  // namespace swarmsync

#endif
