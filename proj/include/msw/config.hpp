#ifndef MSW_CONFIG_HPP
#define MSW_CONFIG_HPP

#include <string>

#include "msw/experiment.hpp"
#include "msw/sim.hpp"

namespace msw {

// Complete, human-readable scenario serialization; round-trips exactly.
std::string scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const std::string& json_text);
// Apply a JSON merge-patch (RFC 7386) on top of an existing config.
ScenarioConfig scenario_patched(const ScenarioConfig& cfg, const std::string& patch_json);

std::string experiment_spec_to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const std::string& json_text);

}  // namespace msw

#endif  // MSW_CONFIG_HPP
